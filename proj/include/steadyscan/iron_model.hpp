#pragma once

#include <string>
#include <vector>

#include "steadyscan/model.hpp"

namespace steadyscan {

/// The shipped iron-homeostasis model (models/iron_v2.model, compiled in).
Model builtin_iron_model();

/// Inconsistent model before revision and the consistent one after.
struct RevisionFixture {
  Model pre_revision;
  Model post_revision;
};
RevisionFixture revision_fixture();

/// Names accepted by load_model besides file paths.
std::vector<std::string> builtin_model_names();

/// A readable file path is parsed from disk; otherwise the name (or the
/// stem of a path such as models/iron_v2.model) selects a built-in model.
Model load_model(const std::string& name_or_path);

/// Simulation length for the cut-off experiment: option `horizon`, else 4e5 s.
double simulation_horizon(const Model& m);

}  // namespace steadyscan
