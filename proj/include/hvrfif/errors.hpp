#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hvrfif {

enum class errc {
    // dataset / partition
    non_increasing_abscissa,
    non_finite_value,
    too_few_points,
    domain_count_out_of_range,
    domain_index_out_of_range,
    domain_too_narrow,
    gamma_size_mismatch,
    gamma_out_of_range,
    unused_domain,
    // expressions
    syntax_error,
    unknown_identifier,
    unknown_function,
    domain_error,
    // assembly
    non_contractive_map,
    not_contractive,
    dead_region,
    non_square_domain,
    non_square_cell,
    // iteration / analysis
    no_convergence,
    hypothesis_violated,
    reducible,
    delta_too_small,
    invalid_parameter,
    // config / io
    config_error,
    io_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::non_increasing_abscissa: return "NonIncreasingAbscissa";
        case errc::non_finite_value: return "NonFiniteValue";
        case errc::too_few_points: return "TooFewPoints";
        case errc::domain_count_out_of_range: return "DomainCountOutOfRange";
        case errc::domain_index_out_of_range: return "DomainIndexOutOfRange";
        case errc::domain_too_narrow: return "DomainTooNarrow";
        case errc::gamma_size_mismatch: return "GammaSizeMismatch";
        case errc::gamma_out_of_range: return "GammaOutOfRange";
        case errc::unused_domain: return "UnusedDomain";
        case errc::syntax_error: return "SyntaxError";
        case errc::unknown_identifier: return "UnknownIdentifier";
        case errc::unknown_function: return "UnknownFunction";
        case errc::domain_error: return "DomainError";
        case errc::non_contractive_map: return "NonContractiveMap";
        case errc::not_contractive: return "NotContractive";
        case errc::dead_region: return "DeadRegion";
        case errc::non_square_domain: return "NonSquareDomain";
        case errc::non_square_cell: return "NonSquareCell";
        case errc::no_convergence: return "NoConvergence";
        case errc::hypothesis_violated: return "HypothesisViolated";
        case errc::reducible: return "Reducible";
        case errc::delta_too_small: return "DeltaTooSmall";
        case errc::invalid_parameter: return "InvalidParameter";
        case errc::config_error: return "ConfigError";
        case errc::io_error: return "IoError";
    }
    return "UnknownError";
}

/// Library-wide exception. `code()` identifies the violated contract;
/// `offset()` is a byte position for parse errors (npos otherwise).
class error : public std::runtime_error {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    error(errc code, const std::string& what, std::size_t offset = npos)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what +
                             (offset == npos ? "" : " (byte " + std::to_string(offset) + ")")),
          code_(code),
          offset_(offset) {}

    errc code() const noexcept { return code_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    errc code_;
    std::size_t offset_;
};

[[noreturn]] inline void raise(errc code, const std::string& what,
                               std::size_t offset = error::npos) {
    throw error(code, what, offset);
}

inline void require(bool cond, errc code, const std::string& what) {
    if (!cond) raise(code, what);
}

}  // namespace hvrfif
