#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tdlab {

enum class Errc {
    SingularSystem,
    DimensionMismatch,
    RankDeficient,
    ZeroDirection,
    NonPositiveMargin,
    RankFailure,
    NonFiniteUpdate,
    IndexOutOfRange,
    IllegalAction,
    NoFeasibleAction,
    InvalidModel,
    InvalidConfig,
    UnknownPreset,
    Io,
};

constexpr std::string_view to_string(Errc code) {
    switch (code) {
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::ZeroDirection: return "ZeroDirection";
    case Errc::NonPositiveMargin: return "NonPositiveMargin";
    case Errc::RankFailure: return "RankFailure";
    case Errc::NonFiniteUpdate: return "NonFiniteUpdate";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::IllegalAction: return "IllegalAction";
    case Errc::NoFeasibleAction: return "NoFeasibleAction";
    case Errc::InvalidModel: return "InvalidModel";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::UnknownPreset: return "UnknownPreset";
    case Errc::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

} // namespace tdlab
