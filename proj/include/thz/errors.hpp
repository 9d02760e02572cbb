// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#ifndef THZ_ERRORS_HPP
#define THZ_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace thz
{

enum class ErrorCode
{
    RankDeficient,
    OutOfRange,
    UnsupportedOrder,
    LengthMismatch,
    InvalidArgument,
    SearchSpaceTooLarge,
    DimensionMismatch,
    EmptyDrop,
    BudgetExhausted,
    PatternExplosion,
    UnknownMode
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string &message);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string &message);

} // namespace thz

#endif
