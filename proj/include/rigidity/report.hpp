#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "rigidity/rigidity_analysis.hpp"

namespace rigidity {

// Versioned machine-readable report. Serialization is deterministic: fixed
// key order, shortest round-trip doubles, no wall-clock fields.
nlohmann::ordered_json report_to_json(const RigidityReport& rep);

// Human-readable rendering carrying the same verdict set.
std::string report_to_text(const RigidityReport& rep);

// The verdict subset shared by both renderings (for structural comparison).
nlohmann::ordered_json report_verdicts(const RigidityReport& rep);

// 17-significant-digit decimal plus a symbolic annotation when the value is
// recognized against a small table of named constants.
std::string format_number(double x);
std::string symbolic_annotation(double x);

} // namespace rigidity
