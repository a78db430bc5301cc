#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ix/bytes.hpp"
#include "ix/gas.hpp"

namespace ix::vm {

// Straight-line stack machine. Values are unsigned 64-bit integers with
// wrap-around arithmetic; `require` is the only way to abort. Control flow is
// limited to forward jumps and `select`, so every valid program terminates.
// `sload`/`sstore` touch contract storage and are only legal in programs
// deployed as part of a monolithic contract; logic programs must be pure.
enum class Op : std::uint8_t {
  Push = 0x01,    // imm: u64 constant
  Arg = 0x02,     // imm: argument index
  Add = 0x03,
  Sub = 0x04,
  Mul = 0x05,
  Lt = 0x06,      // pops b, a; pushes a < b
  Eq = 0x07,
  Select = 0x08,  // pops f, t, cond; pushes cond ? t : f
  Require = 0x09, // pops v; reverts when v == 0
  Ret = 0x0a,     // imm: number of values returned (top of stack, push order)
  Jump = 0x0b,    // imm: absolute instruction index, forward only
  SLoad = 0x0c,   // imm: storage slot index (impure)
  SStore = 0x0d,  // imm: storage slot index (impure)
};

struct Instr {
  Op op;
  std::uint64_t imm = 0;

  bool operator==(const Instr&) const = default;
};

struct Abi {
  std::vector<std::string> params;
  std::vector<std::string> returns;

  bool operator==(const Abi&) const = default;
};

struct Program {
  Abi abi;
  std::vector<Instr> code;

  bool pure() const;  // no SLoad/SStore
  bool operator==(const Program&) const = default;
};

// Canonical bytecode covers the abi and the instruction list; the bytecode
// hash is what cross-chain verification compares.
Bytes encode_program(const Program& p);
Program decode_program(ByteView bytecode);

// Deploy-time validation: opcode/immediate sanity, arg indices within the
// abi, jump targets strictly forward and in range, `ret` count matching the
// abi. Throws ValidationFailed. `allow_impure` admits sload/sstore.
void validate(const Program& p, bool allow_impure = false);

struct ExecResult {
  std::vector<std::uint64_t> outputs;
  std::uint64_t gas_used = 0;
};

// Storage access for impure programs running inside a monolithic contract.
struct StorageHook {
  std::function<std::uint64_t(std::uint64_t)> load;
  std::function<void(std::uint64_t, std::uint64_t)> store;
};

// Pure function of (program, args): throws Revert on failed require,
// InsufficientGas past the limit, AbiMismatch on wrong arity.
ExecResult execute(const Program& p, std::span<const std::uint64_t> args, std::uint64_t gas_limit,
                   const GasSchedule& gas, StorageHook* storage = nullptr);

// Textual assembly, one instruction per line. `in`/`out` directives declare
// the abi; `#` starts a comment. See docs/protocol.md for the grammar.
Program assemble(std::string_view text);
std::string disassemble(const Program& p);

}  // namespace ix::vm
