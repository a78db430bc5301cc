#pragma once

#include "ix/proto.hpp"

namespace ix::proto {

// Shared between the integrated-execution engine and the sequential baseline.

std::uint64_t invocation_expiry_time(const Chain& exec_chain, std::uint64_t now_ms,
                                     std::uint32_t timeout_blocks);
void emit_update_wave(TxContext& ctx, Invocation& inv, bool commit);
void finish_invocation(TxContext& ctx, Invocation& inv, bool committed, ErrCode reason);
void abort_invocation(TxContext& ctx, Invocation& inv, ErrCode reason);

}  // namespace ix::proto
