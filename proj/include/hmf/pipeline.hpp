#pragma once

#include <string>
#include <vector>

#include "hmf/config.hpp"

namespace hmf {

enum class Stage { simulate, densities, strata, gmt, cover, report };

Stage parse_stage(const std::string& name);
std::vector<Stage> parse_stages(const std::string& csv);

// Executes the stages in pipeline order against the artifact directory
// out_base/<config hash>/. Returns the artifact directory.
std::string run_pipeline(const ConfigTable& table, const std::string& out_base,
                         std::vector<Stage> stages);

} // namespace hmf
