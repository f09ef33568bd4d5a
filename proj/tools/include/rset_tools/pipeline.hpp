#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rset_tools/config.hpp"

namespace rset::tools {

/// Verbs in pipeline order (`report` last).
const std::vector<std::string>& command_names();

/// Each command reads upstream artifacts from the output directory, writes
/// its own artifacts plus `<stage>_report.json`, echoes the effective config
/// and returns the report. A missing upstream artifact raises
/// Error(MissingArtifact) naming the command that produces it.
json cmd_gen(const PipelineConfig& config);
json cmd_rank(const PipelineConfig& config);
json cmd_remap(const PipelineConfig& config);
json cmd_pool(const PipelineConfig& config);
json cmd_train_extractor(const PipelineConfig& config);
json cmd_mi(const PipelineConfig& config);
json cmd_fuse(const PipelineConfig& config);
json cmd_report(const PipelineConfig& config);

/// Dispatch by verb; `all` runs every stage in order and returns the summary.
json run_command(std::string_view verb, const PipelineConfig& config);

}  // namespace rset::tools
