#include "mphd/error.hpp"
#include "mphd/rng.hpp"

namespace mphd {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument: return "invalid_argument";
        case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
        case ErrorCode::kNumericalFailure: return "numerical_failure";
        case ErrorCode::kDegenerateData: return "degenerate_data";
        case ErrorCode::kDomain: return "domain_error";
        case ErrorCode::kMalformed: return "malformed_file";
        case ErrorCode::kVersion: return "version_mismatch";
        case ErrorCode::kSchema: return "schema_violation";
        case ErrorCode::kConfiguration: return "configuration_error";
        case ErrorCode::kExhaustedDomain: return "exhausted_domain";
        case ErrorCode::kIo: return "io_error";
    }
    return "unknown";
}

bool Error::is_user_error() const noexcept {
    switch (code_) {
        case ErrorCode::kNumericalFailure:
            return false;
        default:
            return true;
    }
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(fnv1a64(label)) ^
                      splitmix64(index + 0x9E3779B97F4A7C15ULL));
}

Rng derive_rng(std::uint64_t seed, std::string_view label, std::uint64_t index) {
    return Rng(derive_seed(seed, label, index));
}

}  // namespace mphd
