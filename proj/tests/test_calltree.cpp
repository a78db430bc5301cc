#include <doctest.h>

#include "world.hpp"

using namespace ix;
using test::World;

namespace {

class WorldDirectory : public ServiceDirectory {
 public:
  explicit WorldDirectory(const Simulation& sim) : sim_(sim) {}
  const ServiceInfo* find_service(const std::string& id) const override {
    return sim_.find_service_info(id);
  }
  bool registered_on(const std::string& id, std::uint32_t chain) const override {
    return sim_.chain(chain).bridge().registry.count(id) > 0;
  }

 private:
  const Simulation& sim_;
};

}  // namespace

TEST_CASE("train-and-hotel analysis: depth, clone list, lock set") {
  World w;
  w.setup_train_hotel();
  WorldDirectory dir(w.sim);
  const Analysis a = analyze(samples::train_hotel_dapp(1, 2, 3), dir);

  CHECK(a.tree.depth == 3);
  CHECK(a.tree.postorder ==
        std::vector<std::string>{"t_ret", "hotel", "t_out", "agency"});

  // Clone list: train and hotel logic (agency is already on the execution
  // chain), each listed once despite the train being invoked twice.
  REQUIRE(a.clone_list.size() == 2);
  std::set<std::string> clones;
  for (const CloneRef& ref : a.clone_list) clones.insert(ref.service_id);
  CHECK(clones == std::set<std::string>{"train", "hotel"});

  // Lock set: bc2 train seats for both legs, bc3 hotel rooms.
  REQUIRE(a.requirements.by_chain.count(2) == 1);
  REQUIRE(a.requirements.by_chain.count(3) == 1);
  std::uint64_t seat_asks = 0;
  for (const StateRequirement& req : a.requirements.by_chain.at(2)) {
    if (req.spec.slot == "seats") ++seat_asks;
  }
  CHECK(seat_asks == 2);  // one per leg
  bool rooms = false;
  for (const StateRequirement& req : a.requirements.by_chain.at(3)) {
    if (req.spec.slot == "remain" && req.spec.mode == LockModeKind::Amount) rooms = true;
  }
  CHECK(rooms);

  SUBCASE("amount expressions evaluate from user args alone") {
    const std::map<std::string, std::uint64_t> args{{"num_ret", 2}};
    for (const StateRequirement& req : a.requirements.by_chain.at(2)) {
      if (req.node_id == "t_ret" && req.spec.slot == "seats") {
        CHECK(req.spec.expr.eval(args) == 2);
      }
    }
  }
}

TEST_CASE("a dapp using only execution-chain services has nothing to clone or lock") {
  World w;
  w.add_service(1, samples::hub_contract("hub-x", 100));
  DappDescriptor dapp;
  dapp.name = "local";
  dapp.execution_chain = 1;
  dapp.root = "n";
  DappNode node;
  node.id = "n";
  node.service = "hub-x";
  node.entry = "settle";
  node.binds = {{"budget", {BindSrc::Kind::Slot, "budget", "", 0}},
                {"total", {BindSrc::Kind::Arg, "t", "", 0}}};
  dapp.nodes = {{"n", node}};
  WorldDirectory dir(w.sim);
  const Analysis a = analyze(dapp, dir);
  CHECK(a.clone_list.empty());
  CHECK(a.requirements.by_chain.empty());
  CHECK(a.tree.depth == 0);
}

TEST_CASE("cycles are rejected") {
  World w;
  w.add_service(1, samples::hub_contract("hub-y", 100));
  DappDescriptor dapp;
  dapp.name = "cyclic";
  dapp.execution_chain = 1;
  dapp.root = "a";
  DappNode a;
  a.id = "a";
  a.service = "hub-y";
  a.entry = "settle";
  a.children = {"b"};
  DappNode b = a;
  b.id = "b";
  b.children = {"a"};
  dapp.nodes = {{"a", a}, {"b", b}};
  WorldDirectory dir(w.sim);
  CHECK_THROWS_AS(static_cast<void>(analyze(dapp, dir)), Error);
  try {
    static_cast<void>(analyze(dapp, dir));
  } catch (const Error& e) {
    CHECK(e.code() == ErrCode::CyclicCalls);
  }
}

TEST_CASE("unknown services are rejected") {
  World w;
  DappDescriptor dapp;
  dapp.name = "ghost";
  dapp.execution_chain = 1;
  dapp.root = "n";
  DappNode node;
  node.id = "n";
  node.service = "missing";
  dapp.nodes = {{"n", node}};
  WorldDirectory dir(w.sim);
  try {
    static_cast<void>(analyze(dapp, dir));
    FAIL("expected UnknownService");
  } catch (const Error& e) {
    CHECK(e.code() == ErrCode::UnknownService);
  }
}

TEST_CASE("binds may only reference nodes that execute earlier") {
  World w;
  w.add_service(1, samples::hub_contract("hub-z", 100));
  DappDescriptor dapp;
  dapp.name = "forward-ref";
  dapp.execution_chain = 1;
  dapp.root = "a";
  DappNode a;
  a.id = "a";
  a.service = "hub-z";
  a.entry = "settle";
  a.children = {"b"};
  a.binds = {{"total", {BindSrc::Kind::Arg, "b.spent", "", 0}}};  // fine: b runs first
  DappNode b;
  b.id = "b";
  b.service = "hub-z";
  b.entry = "settle";
  b.binds = {{"total", {BindSrc::Kind::Arg, "a.spent", "", 0}}};  // a runs later
  dapp.nodes = {{"a", a}, {"b", b}};
  WorldDirectory dir(w.sim);
  CHECK_THROWS_AS(static_cast<void>(analyze(dapp, dir)), Error);
}

TEST_CASE("over-approximated clone lists change deployment gas, never results") {
  // The same invocation runs against a registry with and without an extra,
  // unused cloned logic program; only deployment gas differs.
  auto run_once = [](bool over_approximate) {
    World w;
    w.add_honest_relayers(1);
    w.setup_train_hotel();
    w.add_service(2, samples::step_contract("unused", 3, 50));
    REQUIRE(w.deploy(samples::train_hotel_dapp(1, 2, 3)));
    if (over_approximate) {
      // Force the superset: clone the unused service's logic as well.
      const ServiceInfo* info = w.sim.find_service_info("unused");
      const Digest job = proto::derive_job_id("superset", 1);
      w.sim.submit(1, "provider", w.sim.chain(1).bridge().address,
                   PayloadRequestClone{job, 2, {{"unused", info->logic_addr}}}, 500'000);
      w.sim.run_for(60'000);
      REQUIRE(w.sim.chain(1).bridge().registry.count("unused") == 1);
    }
    const Digest id = w.invoke(
        "train-hotel", {{"num_out", 1}, {"num_ret", 1}, {"num_rooms", 1}, {"peak", 0}});
    REQUIRE(w.run_to_terminal(id));
    REQUIRE(w.find_invocation(id)->status == InvStatus::Committed);
    return std::pair<std::uint64_t, std::uint64_t>{w.slot_value("train", "seats"),
                                                   w.slot_value("agency", "budget")};
  };
  const auto base = run_once(false);
  const auto over = run_once(true);
  CHECK(base.first == 58);
  CHECK(base == over);
}
