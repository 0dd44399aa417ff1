#pragma once

#include <Eigen/Dense>
#include <string>

#include "fraclife/distributions.hpp"
#include "fraclife/reserve.hpp"
#include "fraclife/transforms.hpp"

namespace fraclife {

// Parsed model description: initial distribution and generator, the clock
// transform, the fractional order, and the row-sum repair tolerance that was
// applied when validating the generator.
struct ModelFile {
    PhaseModel model;
    InhomogeneityTransform transform;
    FractionalClock clock;
    double repair_tolerance = 1e-3;
};

/// Parses a JSON model description with keys alpha, pi, T, transform
/// ({family, parameter}) and optional repair_tolerance.  Every failure throws
/// Error(Parse) with a source:line prefix pointing at the offending key.
ModelFile parse_model_text(const std::string& text, const std::string& source);

/// parse_model_text over the contents of a file.
ModelFile load_model_file(const std::string& path);

/// Serializes a model so that re-parsing reproduces it exactly (shortest
/// round-trip digits).
std::string serialize_model(const ModelFile& mf);

/// Parses a JSON contract with keys a, c, B, b, r and n (a number, or the
/// token "inf" for an unbounded horizon), validated against the model
/// dimension p.  Failures throw Error(Parse) with a source:line prefix.
Contract parse_contract_text(const std::string& text, const std::string& source,
                             Eigen::Index p);

/// parse_contract_text over the contents of a file.
Contract load_contract_file(const std::string& path, Eigen::Index p);

/// Serializes a contract so that re-parsing reproduces it exactly.
std::string serialize_contract(const Contract& contract);

} // namespace fraclife
