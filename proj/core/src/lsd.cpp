#include "ix/lsd.hpp"

#include <algorithm>

#include "ix/errors.hpp"

namespace ix {

Decoupled lsd_transform(const MonolithicSpec& spec) {
  if (spec.funcs.empty()) fail(ErrCode::NotDecouplable, "contract has no functions");
  if (spec.funcs.size() > 1) {
    fail(ErrCode::NotDecouplable, "multiple business functions per contract are unsupported");
  }
  const auto& [func_name, program] = spec.funcs.front();
  if (!program.pure()) {
    fail(ErrCode::NotDecouplable,
         "function " + func_name + " mixes storage access into its logic");
  }
  for (const EntryPoint& entry : spec.entries) {
    if (entry.func != func_name) fail(ErrCode::NotDecouplable, "entry references unknown function");
  }

  Decoupled out;
  out.logic = program;
  out.state.name = "s_" + spec.name;
  out.state.slots = spec.slots;
  out.state.lock_size = spec.lock_size;
  out.state.views = spec.views;
  out.state.entries = spec.entries;
  return out;
}

}  // namespace ix
