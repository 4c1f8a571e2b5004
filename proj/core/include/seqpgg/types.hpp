#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace seqpgg {

/// The three supported experimental designs:
///   T1: sample window 2, position unknown
///   T2: sample window 1, position unknown
///   T3: sample window 2, position known
enum class Treatment { T1, T2, T3 };

inline constexpr std::array<Treatment, 3> kAllTreatments{Treatment::T1, Treatment::T2,
                                                         Treatment::T3};

constexpr int sample_window(Treatment t) { return t == Treatment::T2 ? 1 : 2; }
constexpr bool position_is_known(Treatment t) { return t == Treatment::T3; }

std::string to_string(Treatment t);
Treatment parse_treatment(std::string_view s);

/// Behavioral types whose population shares the mixture model estimates.
/// Gm is the equilibrium strategy type: contribute unless the sample contains
/// a defection (window 2), forgive observed defection with probability gamma
/// (window 1), defect everywhere under position certainty.
enum class BehavioralType { Gm, Altruist, ConditionalCooperator, FreeRider };

inline constexpr std::array<BehavioralType, 4> kAllTypes{
    BehavioralType::Gm, BehavioralType::Altruist, BehavioralType::ConditionalCooperator,
    BehavioralType::FreeRider};

std::string type_label(BehavioralType k);  // "gm", "alt", "coop", "free"
BehavioralType parse_type(std::string_view label);

// Error taxonomy. Domain errors are precondition violations on operation
// arguments; config errors are invalid run specifications; schema and
// integrity errors come from file ingestion; region/solver errors are the
// equilibrium solver's failure modes.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataIntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RegionError : DomainError {
  using DomainError::DomainError;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OptimizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace seqpgg
