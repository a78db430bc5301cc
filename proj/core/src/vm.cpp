#include "ix/vm.hpp"

#include <charconv>
#include <sstream>

#include "ix/errors.hpp"

namespace ix::vm {

namespace {

bool has_imm(Op op) {
  switch (op) {
    case Op::Push:
    case Op::Arg:
    case Op::Ret:
    case Op::Jump:
    case Op::SLoad:
    case Op::SStore:
      return true;
    default:
      return false;
  }
}

const char* op_name(Op op) {
  switch (op) {
    case Op::Push: return "push";
    case Op::Arg: return "arg";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Lt: return "lt";
    case Op::Eq: return "eq";
    case Op::Select: return "select";
    case Op::Require: return "require";
    case Op::Ret: return "ret";
    case Op::Jump: return "jump";
    case Op::SLoad: return "sload";
    case Op::SStore: return "sstore";
  }
  return "?";
}

bool valid_op(std::uint8_t raw) {
  return raw >= static_cast<std::uint8_t>(Op::Push) && raw <= static_cast<std::uint8_t>(Op::SStore);
}

}  // namespace

bool Program::pure() const {
  for (const Instr& ins : code) {
    if (ins.op == Op::SLoad || ins.op == Op::SStore) return false;
  }
  return true;
}

Bytes encode_program(const Program& p) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(p.abi.params.size()));
  for (const auto& name : p.abi.params) w.str(name);
  w.u32(static_cast<std::uint32_t>(p.abi.returns.size()));
  for (const auto& name : p.abi.returns) w.str(name);
  w.u32(static_cast<std::uint32_t>(p.code.size()));
  for (const Instr& ins : p.code) {
    w.u8(static_cast<std::uint8_t>(ins.op));
    if (ins.op == Op::Push) {
      w.u64(ins.imm);
    } else if (has_imm(ins.op)) {
      if (ins.imm > 0xffff) fail(ErrCode::EncodingError, "immediate exceeds u16");
      w.u16(static_cast<std::uint16_t>(ins.imm));
    }
  }
  return w.take();
}

Program decode_program(ByteView bytecode) {
  ByteReader r(bytecode);
  Program p;
  const std::uint32_t n_params = r.u32();
  for (std::uint32_t i = 0; i < n_params; ++i) p.abi.params.push_back(r.str());
  const std::uint32_t n_returns = r.u32();
  for (std::uint32_t i = 0; i < n_returns; ++i) p.abi.returns.push_back(r.str());
  const std::uint32_t n_code = r.u32();
  p.code.reserve(n_code);
  for (std::uint32_t i = 0; i < n_code; ++i) {
    const std::uint8_t raw = r.u8();
    if (!valid_op(raw)) fail(ErrCode::EncodingError, "unknown opcode");
    Instr ins{static_cast<Op>(raw)};
    if (ins.op == Op::Push) {
      ins.imm = r.u64();
    } else if (has_imm(ins.op)) {
      ins.imm = r.u16();
    }
    p.code.push_back(ins);
  }
  r.expect_done();
  return p;
}

void validate(const Program& p, bool allow_impure) {
  if (p.code.empty()) fail(ErrCode::ValidationFailed, "empty program");
  bool saw_ret = false;
  for (std::size_t i = 0; i < p.code.size(); ++i) {
    const Instr& ins = p.code[i];
    switch (ins.op) {
      case Op::Arg:
        if (ins.imm >= p.abi.params.size()) fail(ErrCode::ValidationFailed, "arg index past abi");
        break;
      case Op::Ret:
        if (ins.imm != p.abi.returns.size()) fail(ErrCode::ValidationFailed, "ret count mismatches abi");
        saw_ret = true;
        break;
      case Op::Jump:
        if (ins.imm <= i) fail(ErrCode::ValidationFailed, "back-edge jump");
        if (ins.imm >= p.code.size()) fail(ErrCode::ValidationFailed, "jump past end");
        break;
      case Op::SLoad:
      case Op::SStore:
        if (!allow_impure) fail(ErrCode::ValidationFailed, "storage access in pure program");
        break;
      default:
        break;
    }
  }
  if (!saw_ret) fail(ErrCode::ValidationFailed, "program never returns");
}

ExecResult execute(const Program& p, std::span<const std::uint64_t> args, std::uint64_t gas_limit,
                   const GasSchedule& gas, StorageHook* storage) {
  if (args.size() != p.abi.params.size()) fail(ErrCode::AbiMismatch, "argument count");
  std::vector<std::uint64_t> stack;
  stack.reserve(16);
  std::uint64_t gas_used = 0;

  auto charge = [&](std::uint64_t amount) {
    gas_used += amount;
    if (gas_used > gas_limit) fail(ErrCode::InsufficientGas, "out of gas");
  };
  auto pop = [&]() {
    if (stack.empty()) fail(ErrCode::Revert, "stack underflow");
    const std::uint64_t v = stack.back();
    stack.pop_back();
    return v;
  };

  std::size_t pc = 0;
  while (pc < p.code.size()) {
    const Instr& ins = p.code[pc];
    charge(gas.instruction);
    switch (ins.op) {
      case Op::Push:
        stack.push_back(ins.imm);
        break;
      case Op::Arg:
        if (ins.imm >= args.size()) fail(ErrCode::Revert, "arg out of range");
        stack.push_back(args[ins.imm]);
        break;
      case Op::Add: {
        const std::uint64_t b = pop(), a = pop();
        stack.push_back(a + b);
        break;
      }
      case Op::Sub: {
        const std::uint64_t b = pop(), a = pop();
        stack.push_back(a - b);
        break;
      }
      case Op::Mul: {
        const std::uint64_t b = pop(), a = pop();
        stack.push_back(a * b);
        break;
      }
      case Op::Lt: {
        const std::uint64_t b = pop(), a = pop();
        stack.push_back(a < b ? 1 : 0);
        break;
      }
      case Op::Eq: {
        const std::uint64_t b = pop(), a = pop();
        stack.push_back(a == b ? 1 : 0);
        break;
      }
      case Op::Select: {
        const std::uint64_t f = pop(), t = pop(), cond = pop();
        stack.push_back(cond != 0 ? t : f);
        break;
      }
      case Op::Require: {
        if (pop() == 0) fail(ErrCode::Revert, "require failed");
        break;
      }
      case Op::Ret: {
        const std::size_t n = ins.imm;
        if (stack.size() < n) fail(ErrCode::Revert, "short return");
        ExecResult result;
        result.outputs.assign(stack.end() - static_cast<std::ptrdiff_t>(n), stack.end());
        result.gas_used = gas_used;
        return result;
      }
      case Op::Jump:
        if (ins.imm <= pc || ins.imm >= p.code.size()) fail(ErrCode::Revert, "bad jump");
        pc = ins.imm;
        continue;
      case Op::SLoad:
        if (storage == nullptr) fail(ErrCode::Revert, "storage access in pure context");
        charge(gas.storage_read);
        stack.push_back(storage->load(ins.imm));
        break;
      case Op::SStore: {
        if (storage == nullptr) fail(ErrCode::Revert, "storage access in pure context");
        charge(gas.storage_write);
        const std::uint64_t v = pop();
        storage->store(ins.imm, v);
        break;
      }
    }
    ++pc;
  }
  fail(ErrCode::Revert, "fell off program end");
}

Program assemble(std::string_view text) {
  Program p;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;

  auto config_fail = [&](const std::string& msg) {
    fail(ErrCode::ConfigError, "asm line " + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;

    auto next_word = [&](std::string& out) {
      if (!(ls >> out)) config_fail("missing operand after '" + tok + "'");
    };
    auto next_u64 = [&]() {
      std::string word;
      next_word(word);
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
      if (ec != std::errc() || ptr != word.data() + word.size()) {
        config_fail("bad number '" + word + "'");
      }
      return v;
    };
    auto arg_index = [&](const std::string& name) -> std::uint64_t {
      for (std::size_t i = 0; i < p.abi.params.size(); ++i) {
        if (p.abi.params[i] == name) return i;
      }
      config_fail("unknown parameter '" + name + "'");
      return 0;
    };

    if (tok == "in") {
      std::string name;
      while (ls >> name) p.abi.params.push_back(name);
    } else if (tok == "out") {
      std::string name;
      while (ls >> name) p.abi.returns.push_back(name);
    } else if (tok == "push") {
      p.code.push_back({Op::Push, next_u64()});
    } else if (tok == "arg") {
      std::string name;
      next_word(name);
      std::uint64_t idx;
      if (!name.empty() && (std::isdigit(static_cast<unsigned char>(name[0])) != 0)) {
        idx = std::stoull(name);
      } else {
        idx = arg_index(name);
      }
      p.code.push_back({Op::Arg, idx});
    } else if (tok == "add") {
      p.code.push_back({Op::Add});
    } else if (tok == "sub") {
      p.code.push_back({Op::Sub});
    } else if (tok == "mul") {
      p.code.push_back({Op::Mul});
    } else if (tok == "lt") {
      p.code.push_back({Op::Lt});
    } else if (tok == "eq") {
      p.code.push_back({Op::Eq});
    } else if (tok == "select") {
      p.code.push_back({Op::Select});
    } else if (tok == "require") {
      p.code.push_back({Op::Require});
    } else if (tok == "ret") {
      p.code.push_back({Op::Ret, next_u64()});
    } else if (tok == "jump") {
      p.code.push_back({Op::Jump, next_u64()});
    } else if (tok == "sload") {
      p.code.push_back({Op::SLoad, next_u64()});
    } else if (tok == "sstore") {
      p.code.push_back({Op::SStore, next_u64()});
    } else {
      config_fail("unknown mnemonic '" + tok + "'");
    }
  }
  return p;
}

std::string disassemble(const Program& p) {
  std::ostringstream out;
  out << "in";
  for (const auto& name : p.abi.params) out << ' ' << name;
  out << "\nout";
  for (const auto& name : p.abi.returns) out << ' ' << name;
  out << '\n';
  for (const Instr& ins : p.code) {
    out << op_name(ins.op);
    if (ins.op == Op::Arg && ins.imm < p.abi.params.size()) {
      out << ' ' << p.abi.params[ins.imm];
    } else if (has_imm(ins.op)) {
      out << ' ' << ins.imm;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace ix::vm
