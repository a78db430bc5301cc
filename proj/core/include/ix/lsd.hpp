#pragma once

#include "ix/contracts.hpp"

namespace ix {

// Result of decoupling a monolithic contract: a pure, clonable logic program
// and a stationary state contract holding every slot, the views, the lock
// plumbing, and entry points that call the paired logic.
struct Decoupled {
  vm::Program logic;
  StateSpec state;
};

// Splits a monolithic contract along the logic/state boundary. Throws
// NotDecouplable when an entry's function touches storage directly (the
// supported pattern is pure functions fed through entry-point bindings) or
// when the contract carries more than one business function.
Decoupled lsd_transform(const MonolithicSpec& spec);

}  // namespace ix
