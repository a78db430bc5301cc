#include <doctest.h>

#include "oracles.hpp"
#include "world.hpp"

using namespace ix;
using test::World;

namespace {

std::map<std::string, std::uint64_t> booking_args() {
  return {{"num_out", 1}, {"num_ret", 1}, {"num_rooms", 1}, {"peak", 0}};
}

// The sequential pipeline needs a longer timeout window than the integrated
// one; raise both caps like the benchmark configs do.
void raise_timeouts(World& w, const std::string& dapp_name) {
  for (std::uint32_t c = 1; c <= 3; ++c) w.sim.chain(c).bridge().max_timeout_blocks = 100;
  DappDescriptor& dapp = w.sim.chain(1).bridge().dapps.at(dapp_name);
  dapp.timeout_blocks = 60;
}

void setup_depth(World& w, std::uint32_t depth) {
  for (std::uint32_t i = 1; i <= depth; ++i) {
    w.add_service(i % 2 == 1 ? 2 : 3, samples::step_contract("step" + std::to_string(i), 5, 100));
  }
  const DappDescriptor dapp = samples::depth_dapp(1, {2, 3}, depth);
  w.add_service(1, samples::hub_contract("hub-" + dapp.name, 1'000'000));
  w.sim.install_dapp(1, dapp);
}

}  // namespace

TEST_CASE("baseline train-and-hotel: sequential rounds, two transfers into the train chain") {
  World w;
  w.add_honest_relayers(1);
  w.setup_train_hotel();
  raise_timeouts(w, "train-hotel");

  const Digest id = w.invoke("train-hotel", booking_args(), /*baseline=*/true);
  REQUIRE(w.run_to_terminal(id, 6'000'000));
  const Invocation* inv = w.find_invocation(id);
  CHECK(inv->status == InvStatus::Committed);

  SUBCASE("state lands exactly where the integrated protocol would put it") {
    CHECK(w.slot_value("train", "seats") == 58);
    CHECK(w.slot_value("hotel", "remain") == 49);
    CHECK(w.slot_value("agency", "budget") == 100000 - 34);
    CHECK(w.slot_value("agency", "trips") == 1);
    CHECK(audit_simulation(w.sim).ok);
  }
  SUBCASE("the train chain received two state-transfer rounds") {
    const auto& m = w.sim.metrics().invocations.at(id);
    CHECK(m.transfer_rounds.at(2) == 2);  // t_ret and t_out segments
    CHECK(m.transfer_rounds.at(3) == 1);  // hotel segment
    CHECK(inv->seg_msgs == 3);
    CHECK(inv->update_msgs == 2);
  }
  SUBCASE("the sequential pipeline takes 4 rounds per remote segment plus the commit wave") {
    CHECK(inv->terminal_height - inv->submit_height + 1 == 4 * 3 + 5);
  }
}

TEST_CASE("baseline latency is affine in depth; integrated execution stays constant") {
  std::vector<std::uint64_t> base_rounds;
  std::vector<std::uint64_t> ix_rounds;
  for (std::uint32_t depth : {2U, 3U, 4U}) {
    World wb;
    wb.add_honest_relayers(1);
    setup_depth(wb, depth);
    const std::string dapp = "depth-" + std::to_string(depth);
    raise_timeouts(wb, dapp);
    const Digest idb = wb.invoke(dapp, {{"num", 1}}, /*baseline=*/true);
    REQUIRE(wb.run_to_terminal(idb, 6'000'000));
    REQUIRE(wb.find_invocation(idb)->status == InvStatus::Committed);
    base_rounds.push_back(wb.find_invocation(idb)->terminal_height -
                          wb.find_invocation(idb)->submit_height + 1);

    World wi;
    wi.add_honest_relayers(1);
    setup_depth(wi, depth);
    REQUIRE(wi.deploy(samples::depth_dapp(1, {2, 3}, depth)));
    const Digest idi = wi.invoke(dapp, {{"num", 1}});
    REQUIRE(wi.run_to_terminal(idi, 6'000'000));
    REQUIRE(wi.find_invocation(idi)->status == InvStatus::Committed);
    ix_rounds.push_back(wi.find_invocation(idi)->terminal_height -
                        wi.find_invocation(idi)->submit_height + 1);

    // Both protocols leave identical end states.
    for (std::uint32_t i = 1; i <= depth; ++i) {
      const std::string svc = "step" + std::to_string(i);
      CHECK(wb.slot_value(svc, "avail") == wi.slot_value(svc, "avail"));
    }
  }
  // Affine with positive slope: constant first difference of 4 rounds.
  CHECK(base_rounds[1] - base_rounds[0] == 4);
  CHECK(base_rounds[2] - base_rounds[1] == 4);
  // The integrated pipeline is depth-independent and strictly faster.
  CHECK(ix_rounds[0] == ix_rounds[1]);
  CHECK(ix_rounds[1] == ix_rounds[2]);
  for (std::size_t i = 0; i < ix_rounds.size(); ++i) CHECK(ix_rounds[i] < base_rounds[i]);
}

TEST_CASE("single-chain dapp degenerates to one local execution with no messages") {
  World w;
  w.add_honest_relayers(1);
  w.add_service(1, samples::hub_contract("hub-solo", 500));
  DappDescriptor dapp;
  dapp.name = "solo";
  dapp.execution_chain = 1;
  dapp.root = "n";
  DappNode node;
  node.id = "n";
  node.service = "hub-solo";
  node.entry = "settle";
  node.binds = {{"budget", {BindSrc::Kind::Slot, "budget", "", 0}},
                {"total", {BindSrc::Kind::Arg, "pay", "", 0}}};
  node.writes = {{"budget", {WriteDst::Kind::Slot, "budget", ""}}};
  dapp.nodes = {{"n", node}};
  w.sim.install_dapp(1, dapp);

  const Digest id = w.invoke("solo", {{"pay", 123}}, /*baseline=*/true);
  REQUIRE(w.run_to_terminal(id));
  const Invocation* inv = w.find_invocation(id);
  CHECK(inv->status == InvStatus::Committed);
  CHECK(inv->seg_msgs == 0);
  CHECK(inv->update_msgs == 0);
  CHECK(w.slot_value("hub-solo", "budget") == 377);
  CHECK(audit_simulation(w.sim).ok);
}

TEST_CASE("baseline conflicts abort cleanly and release every held lock") {
  World w;
  w.add_honest_relayers(1);
  w.setup_train_hotel();
  raise_timeouts(w, "train-hotel");

  // Hostage whole lock on the hotel: the second segment fails, the first
  // segment's train locks must drain through the abort wave.
  StateContract& hotel = w.state_of("hotel");
  LockAsk hostage;
  hostage.slot = "remain";
  hostage.bag_key = kWholeBagKey;
  hostage.whole = true;
  hotel.lock_state(w.sim.chain(3).bridge().address, {hostage}, sha256(Bytes{5}), 100'000,
                   w.sim.chain(3).finality());

  const Digest id = w.invoke("train-hotel", booking_args(), /*baseline=*/true);
  REQUIRE(w.run_to_terminal(id, 6'000'000));
  const Invocation* inv = w.find_invocation(id);
  CHECK(inv->status == InvStatus::Aborted);
  CHECK(inv->abort_reason == ErrCode::LockConflict);
  w.sim.run_for(120'000);
  CHECK(w.slot_value("train", "seats") == 60);
  CHECK(w.state_of("train").live_bag_count(w.sim.chain(2).finality()) == 0);
  CHECK(w.slot_value("agency", "trips") == 0);
}

TEST_CASE("baseline and integrated end states agree with the monolithic oracle") {
  const auto args = booking_args();
  oracle::MonoWorld mono = oracle::MonoWorld::build({{"train", samples::train_contract()},
                                                     {"hotel", samples::hotel_contract()},
                                                     {"agency", samples::agency_contract()}});
  mono.run(samples::train_hotel_dapp(1, 2, 3), args);

  World wb;
  wb.add_honest_relayers(1);
  wb.setup_train_hotel();
  raise_timeouts(wb, "train-hotel");
  const Digest idb = wb.invoke("train-hotel", args, /*baseline=*/true);
  REQUIRE(wb.run_to_terminal(idb, 6'000'000));

  World wi;
  wi.add_honest_relayers(1);
  wi.setup_train_hotel();
  REQUIRE(wi.deploy(samples::train_hotel_dapp(1, 2, 3)));
  const Digest idi = wi.invoke("train-hotel", args);
  REQUIRE(wi.run_to_terminal(idi, 6'000'000));

  for (const std::string svc : {"train", "hotel", "agency"}) {
    const auto expected = mono.storage_of(svc);
    for (const auto& [slot, value] : expected) {
      if (value.kind != SlotKind::Uint) continue;
      CHECK(wb.slot_value(svc, slot) == value.uint_value);
      CHECK(wi.slot_value(svc, slot) == value.uint_value);
    }
  }
}
