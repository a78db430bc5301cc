#include "ix/samples.hpp"

#include "ix/vm.hpp"

namespace ix::samples {

namespace {

std::uint64_t rng_range(std::mt19937_64& rng, std::uint64_t n) {
  return n == 0 ? 0 : rng() % n;
}

}  // namespace

// --- assembly sources ----------------------------------------------------------

const char* kHotelBookAsm = R"(# hotel room booking
in price remain num
out remain cost
arg num
arg remain
lt
arg num
arg remain
eq
add
require        # num <= remain
arg remain
arg num
sub            # remain' = remain - num
arg price
arg num
mul            # cost = price * num
ret 2
)";

const char* kTrainBookAsm = R"(# train seat booking with peak pricing and a bulk rebate
in price seats num peak
out seats cost
arg num
arg seats
lt
arg num
arg seats
eq
add
require        # num <= seats
arg seats
arg num
sub            # seats' = seats - num
push 1
arg peak
add
arg price
mul            # unit = price * (1 + peak)
arg num
mul            # base = unit * num
push 3
arg num
lt
push 3
arg num
eq
add            # num >= 3
arg num
push 0
select         # rebate = num >= 3 ? num : 0
sub            # cost = base - rebate
ret 2
)";

const char* kAgencyPlanAsm = R"(# travel agency: pay for three bookings out of one budget
in budget cost_out cost_hotel cost_ret trips
out spent budget trips
arg cost_out
arg cost_hotel
add
arg cost_ret
add            # spent
arg cost_out
arg cost_hotel
add
arg cost_ret
add
arg budget
lt
arg cost_out
arg cost_hotel
add
arg cost_ret
add
arg budget
eq
add
require        # spent <= budget
arg budget
arg cost_out
arg cost_hotel
add
arg cost_ret
add
sub            # budget' = budget - spent
arg trips
push 1
add            # trips' = trips + 1
ret 3
)";

const char* kStepAsm = R"(# pipeline step: consume units and accumulate cost
in price avail num cost_in
out avail cost
arg num
arg avail
lt
arg num
arg avail
eq
add
require        # num <= avail
arg avail
arg num
sub            # avail' = avail - num
arg cost_in
arg price
arg num
mul
add            # cost = cost_in + price * num
ret 2
)";

const char* kHubAsm = R"(# hub: settle an accumulated cost against a budget
in budget total
out budget spent
arg total
arg budget
lt
arg total
arg budget
eq
add
require        # total <= budget
arg budget
arg total
sub            # budget' = budget - total
arg total
ret 2
)";

const char* kCounterImpureAsm = R"(# bumps its own counter slot in place (not decouplable)
in num
out bumped
sload 0
arg num
add
sstore 0
sload 0
ret 1
)";

// --- contract specs ---------------------------------------------------------------

namespace {

EntryPoint book_entry(const std::string& func, bool with_peak) {
  EntryPoint e;
  e.name = "book";
  e.func = func;
  e.binds.emplace_back("price", BindSrc{BindSrc::Kind::Slot, "price", "", 0});
  e.binds.emplace_back(with_peak ? "seats" : "remain",
                       BindSrc{BindSrc::Kind::Slot, with_peak ? "seats" : "remain", "", 0});
  e.binds.emplace_back("num", BindSrc{BindSrc::Kind::Arg, "num", "", 0});
  if (with_peak) e.binds.emplace_back("peak", BindSrc{BindSrc::Kind::Arg, "peak", "", 0});
  e.writes.emplace_back(with_peak ? "seats" : "remain",
                        WriteDst{WriteDst::Kind::Slot, with_peak ? "seats" : "remain", ""});
  return e;
}

}  // namespace

MonolithicSpec hotel_contract() {
  MonolithicSpec spec;
  spec.name = "hotel";
  spec.slots = {
      {"price", SlotKind::Uint, 10, "", {}},
      {"remain", SlotKind::Uint, 50, "", {}},
      {"rating", SlotKind::Uint, 5, "", {}},
      {"owner", SlotKind::Addr, 0, "hotel-owner", {}},
      {"accounts", SlotKind::Map, 0, "", {}},
  };
  spec.lock_size = 1;
  spec.funcs.emplace_back("book", vm::assemble(kHotelBookAsm));
  spec.views = {{"get_price", "price"}, {"get_remain", "remain"}};
  spec.entries = {book_entry("book", false)};
  return spec;
}

MonolithicSpec train_contract() {
  MonolithicSpec spec;
  spec.name = "train";
  spec.slots = {
      {"price", SlotKind::Uint, 12, "", {}},
      {"seats", SlotKind::Uint, 60, "", {}},
  };
  spec.lock_size = 1;
  spec.funcs.emplace_back("book", vm::assemble(kTrainBookAsm));
  spec.views = {{"get_price", "price"}, {"get_seats", "seats"}};
  spec.entries = {book_entry("book", true)};
  return spec;
}

MonolithicSpec agency_contract() {
  MonolithicSpec spec;
  spec.name = "agency";
  spec.slots = {
      {"budget", SlotKind::Uint, 100000, "", {}},
      {"trips", SlotKind::Uint, 0, "", {}},
  };
  spec.lock_size = 1;
  spec.funcs.emplace_back("plan", vm::assemble(kAgencyPlanAsm));
  spec.views = {{"get_budget", "budget"}, {"get_trips", "trips"}};
  EntryPoint e;
  e.name = "plan";
  e.func = "plan";
  e.binds.emplace_back("budget", BindSrc{BindSrc::Kind::Slot, "budget", "", 0});
  e.binds.emplace_back("trips", BindSrc{BindSrc::Kind::Slot, "trips", "", 0});
  e.binds.emplace_back("cost_out", BindSrc{BindSrc::Kind::Arg, "cost_out", "", 0});
  e.binds.emplace_back("cost_hotel", BindSrc{BindSrc::Kind::Arg, "cost_hotel", "", 0});
  e.binds.emplace_back("cost_ret", BindSrc{BindSrc::Kind::Arg, "cost_ret", "", 0});
  e.writes.emplace_back("budget", WriteDst{WriteDst::Kind::Slot, "budget", ""});
  e.writes.emplace_back("trips", WriteDst{WriteDst::Kind::Slot, "trips", ""});
  spec.entries = {e};
  return spec;
}

MonolithicSpec step_contract(const std::string& name, std::uint64_t price, std::uint64_t avail) {
  MonolithicSpec spec;
  spec.name = name;
  spec.slots = {
      {"price", SlotKind::Uint, price, "", {}},
      {"avail", SlotKind::Uint, avail, "", {}},
  };
  spec.lock_size = 1;
  spec.funcs.emplace_back("step", vm::assemble(kStepAsm));
  spec.views = {{"get_avail", "avail"}};
  EntryPoint e;
  e.name = "step";
  e.func = "step";
  e.binds.emplace_back("price", BindSrc{BindSrc::Kind::Slot, "price", "", 0});
  e.binds.emplace_back("avail", BindSrc{BindSrc::Kind::Slot, "avail", "", 0});
  e.binds.emplace_back("num", BindSrc{BindSrc::Kind::Arg, "num", "", 0});
  e.binds.emplace_back("cost_in", BindSrc{BindSrc::Kind::Arg, "cost_in", "", 0});
  e.writes.emplace_back("avail", WriteDst{WriteDst::Kind::Slot, "avail", ""});
  spec.entries = {e};
  return spec;
}

MonolithicSpec hub_contract(const std::string& name, std::uint64_t budget) {
  MonolithicSpec spec;
  spec.name = name;
  spec.slots = {{"budget", SlotKind::Uint, budget, "", {}}};
  spec.lock_size = 1;
  spec.funcs.emplace_back("settle", vm::assemble(kHubAsm));
  spec.views = {{"get_budget", "budget"}};
  EntryPoint e;
  e.name = "settle";
  e.func = "settle";
  e.binds.emplace_back("budget", BindSrc{BindSrc::Kind::Slot, "budget", "", 0});
  e.binds.emplace_back("total", BindSrc{BindSrc::Kind::Arg, "total", "", 0});
  e.writes.emplace_back("budget", WriteDst{WriteDst::Kind::Slot, "budget", ""});
  spec.entries = {e};
  return spec;
}

MonolithicSpec impure_counter_contract() {
  MonolithicSpec spec;
  spec.name = "counter";
  spec.slots = {{"count", SlotKind::Uint, 0, "", {}}};
  spec.lock_size = 1;
  spec.funcs.emplace_back("bump", vm::assemble(kCounterImpureAsm));
  spec.views = {{"get_count", "count"}};
  EntryPoint e;
  e.name = "bump";
  e.func = "bump";
  e.binds.emplace_back("num", BindSrc{BindSrc::Kind::Arg, "num", "", 0});
  spec.entries = {e};
  return spec;
}

// --- descriptors -------------------------------------------------------------------

DappDescriptor train_hotel_dapp(std::uint32_t execution_chain, std::uint32_t train_chain,
                                std::uint32_t hotel_chain) {
  (void)train_chain;
  (void)hotel_chain;
  DappDescriptor dapp;
  dapp.name = "train-hotel";
  dapp.execution_chain = execution_chain;
  dapp.timeout_blocks = 10;
  dapp.root = "agency";

  DappNode t_ret;
  t_ret.id = "t_ret";
  t_ret.service = "train";
  t_ret.entry = "book";
  t_ret.locks = {{"seats", LockModeKind::Amount, {0, {{1, "num_ret"}}}, {}},
                 {"price", LockModeKind::Read, {}, {}}};
  t_ret.binds = {
      {"price", {BindSrc::Kind::Slot, "price", "", 0}},
      {"seats", {BindSrc::Kind::Slot, "seats", "", 0}},
      {"num", {BindSrc::Kind::Arg, "num_ret", "", 0}},
      {"peak", {BindSrc::Kind::Arg, "peak", "", 0}},
  };
  t_ret.writes = {{"seats", {WriteDst::Kind::Slot, "seats", ""}}};

  DappNode hotel;
  hotel.id = "hotel";
  hotel.service = "hotel";
  hotel.entry = "book";
  hotel.children = {"t_ret"};
  hotel.locks = {{"remain", LockModeKind::Amount, {0, {{1, "num_rooms"}}}, {}},
                 {"price", LockModeKind::Read, {}, {}}};
  hotel.binds = {
      {"price", {BindSrc::Kind::Slot, "price", "", 0}},
      {"remain", {BindSrc::Kind::Slot, "remain", "", 0}},
      {"num", {BindSrc::Kind::Arg, "num_rooms", "", 0}},
  };
  hotel.writes = {{"remain", {WriteDst::Kind::Slot, "remain", ""}}};

  DappNode t_out;
  t_out.id = "t_out";
  t_out.service = "train";
  t_out.entry = "book";
  t_out.children = {"hotel"};
  t_out.locks = {{"seats", LockModeKind::Amount, {0, {{1, "num_out"}}}, {}},
                 {"price", LockModeKind::Read, {}, {}}};
  t_out.binds = {
      {"price", {BindSrc::Kind::Slot, "price", "", 0}},
      {"seats", {BindSrc::Kind::Slot, "seats", "", 0}},
      {"num", {BindSrc::Kind::Arg, "num_out", "", 0}},
      {"peak", {BindSrc::Kind::Arg, "peak", "", 0}},
  };
  t_out.writes = {{"seats", {WriteDst::Kind::Slot, "seats", ""}}};

  DappNode agency;
  agency.id = "agency";
  agency.service = "agency";
  agency.entry = "plan";
  agency.children = {"t_out"};
  agency.binds = {
      {"budget", {BindSrc::Kind::Slot, "budget", "", 0}},
      {"trips", {BindSrc::Kind::Slot, "trips", "", 0}},
      {"cost_out", {BindSrc::Kind::Arg, "t_out.cost", "", 0}},
      {"cost_hotel", {BindSrc::Kind::Arg, "hotel.cost", "", 0}},
      {"cost_ret", {BindSrc::Kind::Arg, "t_ret.cost", "", 0}},
  };
  agency.writes = {
      {"budget", {WriteDst::Kind::Slot, "budget", ""}},
      {"trips", {WriteDst::Kind::Slot, "trips", ""}},
  };

  dapp.nodes = {{"t_ret", t_ret}, {"hotel", hotel}, {"t_out", t_out}, {"agency", agency}};
  return dapp;
}

DappDescriptor depth_dapp(std::uint32_t execution_chain,
                          const std::vector<std::uint32_t>& invoked_chains, std::uint32_t depth) {
  DappDescriptor dapp;
  dapp.name = "depth-" + std::to_string(depth);
  dapp.execution_chain = execution_chain;
  dapp.timeout_blocks = 10;
  dapp.root = "hub";

  std::string child_of_hub;
  for (std::uint32_t i = 1; i <= depth; ++i) {
    DappNode node;
    node.id = "step" + std::to_string(i);
    node.service = "step" + std::to_string(i);
    node.entry = "step";
    const bool leaf = i == depth;
    if (!leaf) node.children = {"step" + std::to_string(i + 1)};
    node.locks = {{"avail", LockModeKind::Amount, {0, {{1, "num"}}}, {}},
                  {"price", LockModeKind::Read, {}, {}}};
    node.binds = {
        {"price", {BindSrc::Kind::Slot, "price", "", 0}},
        {"avail", {BindSrc::Kind::Slot, "avail", "", 0}},
        {"num", {BindSrc::Kind::Arg, "num", "", 0}},
        {"cost_in", leaf ? BindSrc{BindSrc::Kind::Const, "", "", 0}
                         : BindSrc{BindSrc::Kind::Arg, "step" + std::to_string(i + 1) + ".cost", "", 0}},
    };
    node.writes = {{"avail", {WriteDst::Kind::Slot, "avail", ""}}};
    dapp.nodes[node.id] = node;
  }

  DappNode hub;
  hub.id = "hub";
  hub.service = "hub-" + dapp.name;
  hub.entry = "settle";
  hub.children = {"step1"};
  hub.binds = {
      {"budget", {BindSrc::Kind::Slot, "budget", "", 0}},
      {"total", {BindSrc::Kind::Arg, "step1.cost", "", 0}},
  };
  hub.writes = {{"budget", {WriteDst::Kind::Slot, "budget", ""}}};
  dapp.nodes["hub"] = hub;
  (void)invoked_chains;
  return dapp;
}

DappDescriptor booking_dapp(std::uint32_t execution_chain, std::uint32_t hotel_chain) {
  (void)hotel_chain;
  DappDescriptor dapp;
  dapp.name = "book-room";
  dapp.execution_chain = execution_chain;
  dapp.timeout_blocks = 10;
  dapp.root = "hub";

  DappNode room;
  room.id = "room";
  room.service = "hotel";
  room.entry = "book";
  room.locks = {{"remain", LockModeKind::Amount, {0, {{1, "num_rooms"}}}, {}},
                {"price", LockModeKind::Read, {}, {}}};
  room.binds = {
      {"price", {BindSrc::Kind::Slot, "price", "", 0}},
      {"remain", {BindSrc::Kind::Slot, "remain", "", 0}},
      {"num", {BindSrc::Kind::Arg, "num_rooms", "", 0}},
  };
  room.writes = {{"remain", {WriteDst::Kind::Slot, "remain", ""}}};

  DappNode hub;
  hub.id = "hub";
  hub.service = "book-hub";
  hub.entry = "settle";
  hub.children = {"room"};
  hub.binds = {
      {"budget", {BindSrc::Kind::Slot, "budget", "", 0}},
      {"total", {BindSrc::Kind::Arg, "room.cost", "", 0}},
  };
  hub.writes = {{"budget", {WriteDst::Kind::Slot, "budget", ""}}};

  dapp.nodes = {{"room", room}, {"hub", hub}};
  return dapp;
}

RandomDapp random_dapp(std::mt19937_64& rng, const std::vector<std::uint32_t>& chains,
                       std::uint32_t max_contracts, const std::string& name_prefix) {
  RandomDapp out;
  const std::uint32_t execution_chain = chains.front();
  out.descriptor.name = name_prefix;
  out.descriptor.execution_chain = execution_chain;
  out.descriptor.timeout_blocks = 10;

  const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng_range(rng, max_contracts));
  out.args["num"] = 1 + rng_range(rng, 3);

  // A linear dependency chain keeps data flow simple while the chain/lock-mode
  // mix varies; node i consumes node i+1's accumulated cost.
  for (std::uint32_t i = 1; i <= n; ++i) {
    const std::string service = name_prefix + "-svc" + std::to_string(i);
    const std::uint32_t home = chains[rng_range(rng, chains.size())];
    const std::uint64_t price = 1 + rng_range(rng, 9);
    const std::uint64_t avail = 40 + rng_range(rng, 60);
    out.services.emplace_back(service, step_contract(service, price, avail));
    out.home_chain[service] = home;

    DappNode node;
    node.id = "n" + std::to_string(i);
    node.service = service;
    node.entry = "step";
    const bool leaf = i == n;
    if (!leaf) node.children = {"n" + std::to_string(i + 1)};
    LockSpec lock;
    lock.slot = "avail";
    const std::uint64_t mode_draw = rng_range(rng, 3);
    if (mode_draw == 0) {
      lock.mode = LockModeKind::Whole;
    } else if (mode_draw == 1) {
      lock.mode = LockModeKind::Amount;
      lock.expr = {0, {{1, "num"}}};
    } else {
      lock.mode = LockModeKind::Dynamic;
      lock.expr = {0, {{1, "num"}}};
    }
    node.locks = {lock, {"price", LockModeKind::Read, {}, {}}};
    node.binds = {
        {"price", {BindSrc::Kind::Slot, "price", "", 0}},
        {"avail", {BindSrc::Kind::Slot, "avail", "", 0}},
        {"num", {BindSrc::Kind::Arg, "num", "", 0}},
        {"cost_in", leaf ? BindSrc{BindSrc::Kind::Const, "", "", 0}
                         : BindSrc{BindSrc::Kind::Arg, "n" + std::to_string(i + 1) + ".cost", "", 0}},
    };
    node.writes = {{"avail", {WriteDst::Kind::Slot, "avail", ""}}};
    out.descriptor.nodes[node.id] = node;
  }
  out.descriptor.root = "n1";
  return out;
}

}  // namespace ix::samples
