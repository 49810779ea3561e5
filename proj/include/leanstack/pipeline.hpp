// Copyright 2026 The leanstack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Pipelines: ordered command invocations run over node-local files.
// A pipeline is what a leader ships to a worker for remote execution.

#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "leanstack/tukubai.hpp"

namespace leanstack {

/// One command invocation, e.g. {"msort", {"key=1"}} or {"sm2", {"1","1","2","2"}}.
struct Stage {
  std::string name;
  std::vector<std::string> args;

  friend bool operator==(const Stage&, const Stage&) = default;
};

struct PipelineSpec {
  std::vector<Stage> stages;
  /// Job-relative input files, read back to back.
  std::vector<std::string> inputs;
  /// Job-relative output file.
  std::string output;

  friend bool operator==(const PipelineSpec&, const PipelineSpec&) = default;
};

struct PipelineResult {
  std::uint64_t records = 0;
  double seconds = 0.0;
};

/// Names accepted as pipeline stages.
const std::vector<std::string>& stage_names();

/// Splits "msort key=1" on spaces.
Stage parse_stage(std::string_view text);

/// Throws Error if the stage name is unknown or its arguments do not parse.
void validate_stage(const Stage& stage);

struct StageContext {
  SortOptions sort;
  /// Directory against which file arguments (join's right input) resolve.
  std::filesystem::path base;
};

/// Runs one stage from `in` to `out`.
void run_stage(const Stage& stage, std::istream& in, std::ostream& out, const StageContext& ctx);

/// Runs `stages` over the concatenated `inputs` into `output`, staging
/// intermediates in a scratch directory under `scratch_parent`.
PipelineResult run_stages(std::span<const Stage> stages,
                          const std::vector<std::filesystem::path>& inputs,
                          const std::filesystem::path& output, const StageContext& ctx,
                          const std::filesystem::path& scratch_parent);

/// Runs `spec` with paths resolved under `root`. Intermediate results are
/// staged in scratch files under root/.tmp. Errors name the failing stage.
PipelineResult run_pipeline(const PipelineSpec& spec, const std::filesystem::path& root,
                            const SortOptions& sort = {});

/// Rejects absolute paths and `..` components; returns root / relative.
std::filesystem::path resolve_relative(const std::filesystem::path& root,
                                       std::string_view relative);

std::string pipeline_to_json(const PipelineSpec& spec);
PipelineSpec pipeline_from_json(std::string_view json);

}  // namespace leanstack
