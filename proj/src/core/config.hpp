#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "experiments.hpp"
#include "symbolic_model.hpp"

namespace homdim {

// Config files are YAML with four sections: flow, set, experiment, dimension.
// `overrides` are dotted assignments such as "experiment.eta=2.5"; the value
// is itself parsed as YAML, so lists work ("experiment.T_grid=[2,4,6]").
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {},
                              const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

// Flow files: name, k, states, edges [{from, to, roof, f}].
FlowSpec parse_flow(std::string_view text);
FlowSpec load_flow(const std::filesystem::path& path);
// A builtin name, or else a path to a flow file.
FlowSpec resolve_flow(const std::string& name_or_path);

SetSpec parse_set(std::string_view text);

std::string serialize_flow(const FlowSpec& flow);
std::string serialize_set(const SetSpec& set);
// Canonical YAML; the flow is always written inline.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace homdim
