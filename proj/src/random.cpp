#include "kinetic/random.hpp"

#include <cmath>

#include "kinetic/error.hpp"

namespace kinetic {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kInvalidModel: return "invalid model";
    case ErrorCode::kOutOfDomain: return "out of domain";
    case ErrorCode::kNoClosedForm: return "no closed form";
    case ErrorCode::kIllConditioned: return "ill-conditioned";
    case ErrorCode::kAmbiguousRegime: return "ambiguous";
    case ErrorCode::kRegimeMismatch: return "regime mismatch";
    case ErrorCode::kUnstable: return "unstable";
    case ErrorCode::kInvariantViolation: return "invariant violation";
    case ErrorCode::kConfig: return "config";
  }
  return "error";
}

namespace {

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t index,
                           StreamTag tag) {
  const auto t = static_cast<std::uint64_t>(tag);
  std::seed_seq seq{lo32(seed), hi32(seed), lo32(index), hi32(index),
                    lo32(t),    hi32(t)};
  engine_.seed(seq);
}

std::uint64_t RandomStream::poisson(double mean) {
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(engine_);
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace kinetic
