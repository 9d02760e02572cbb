// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "thz/errors.hpp"

namespace thz
{

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code)
    {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyDrop: return "EmptyDrop";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::PatternExplosion: return "PatternExplosion";
    case ErrorCode::UnknownMode: return "UnknownMode";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
{
}

void raise(ErrorCode code, const std::string &message)
{
    throw Error(code, message);
}

} // namespace thz
