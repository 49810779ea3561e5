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

#include "leanstack/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <memory>

#include <json.hpp>

#include "leanstack/error.hpp"
#include "leanstack/io.hpp"

namespace leanstack {
namespace {

void expect_args(const Stage& s, std::size_t min, std::size_t max) {
  if (s.args.size() < min || s.args.size() > max) {
    throw Error("stage '" + s.name + "' got " + std::to_string(s.args.size()) +
                " argument(s)");
  }
}

KeyRange stage_key(std::string_view arg) {
  if (arg.starts_with("key=")) return parse_key_spec(arg);
  return parse_key_spec("key=" + std::string(arg));
}

std::vector<std::size_t> stage_columns(const Stage& s) {
  std::vector<std::size_t> cols;
  for (const auto& a : s.args) cols.push_back(parse_column(a));
  return cols;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {
      "tokenize", "msort", "lcnt", "count", "sm2", "grep", "select", "self", "join"};
  return names;
}

Stage parse_stage(std::string_view text) {
  Stage stage;
  std::size_t i = 0;
  std::vector<std::string> words;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < text.size() && text[i] != ' ') ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  if (words.empty()) throw Error("empty stage");
  stage.name = words.front();
  stage.args.assign(words.begin() + 1, words.end());
  return stage;
}

void validate_stage(const Stage& s) {
  const auto& n = s.name;
  if (n == "tokenize" || n == "lcnt") {
    expect_args(s, 0, 0);
  } else if (n == "msort") {
    expect_args(s, 1, 1);
    stage_key(s.args[0]);
  } else if (n == "count") {
    expect_args(s, 2, 2);
    key_from_columns(s.args[0], s.args[1]);
  } else if (n == "sm2") {
    expect_args(s, 4, 4);
    key_from_columns(s.args[0], s.args[1]);
    key_from_columns(s.args[2], s.args[3]);
  } else if (n == "grep") {
    expect_args(s, 1, 1);
    if (s.args[0].empty()) throw Error("grep: needle must not be empty");
  } else if (n == "select") {
    expect_args(s, 2, 2);
    parse_column(s.args[0]);
  } else if (n == "self") {
    expect_args(s, 1, 4096);
    stage_columns(s);
  } else if (n == "join") {
    expect_args(s, 3, 3);
    stage_key(s.args[1]);
    stage_key(s.args[2]);
  } else {
    throw Error("unknown stage '" + n + "'");
  }
}

void run_stage(const Stage& s, std::istream& in, std::ostream& out, const StageContext& ctx) {
  validate_stage(s);
  const auto& n = s.name;
  if (n == "tokenize") {
    tokenize(in, out);
  } else if (n == "msort") {
    msort(in, out, stage_key(s.args[0]), ctx.sort);
  } else if (n == "lcnt") {
    out << lcnt(in) << '\n';
  } else if (n == "count") {
    count_by_key(in, out, key_from_columns(s.args[0], s.args[1]));
  } else if (n == "sm2") {
    sm2(in, out, key_from_columns(s.args[0], s.args[1]), key_from_columns(s.args[2], s.args[3]));
  } else if (n == "grep") {
    out << grep_count(in, s.args[0]) << '\n';
  } else if (n == "select") {
    select_rows(in, out, parse_column(s.args[0]), s.args[1]);
  } else if (n == "self") {
    const auto cols = stage_columns(s);
    self(in, out, cols);
  } else if (n == "join") {
    auto right = open_input(ctx.base.empty() ? std::filesystem::path(s.args[0])
                                             : resolve_relative(ctx.base, s.args[0]));
    merge_join(in, *right, out, stage_key(s.args[1]), stage_key(s.args[2]));
  }
  if (!out) throw Error("stage '" + n + "': write failure");
}

std::filesystem::path resolve_relative(const std::filesystem::path& root,
                                       std::string_view relative) {
  const std::filesystem::path rel(relative);
  if (relative.empty() || rel.is_absolute()) {
    throw Error("path '" + std::string(relative) + "' must be relative and non-empty");
  }
  for (const auto& part : rel) {
    if (part == "..") throw Error("path '" + std::string(relative) + "' escapes its root");
  }
  return root / rel;
}

PipelineResult run_stages(std::span<const Stage> stages,
                          const std::vector<std::filesystem::path>& inputs,
                          const std::filesystem::path& output, const StageContext& base_ctx,
                          const std::filesystem::path& scratch_parent) {
  if (stages.empty()) throw Error("pipeline has no stages");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    try {
      validate_stage(stages[i]);
    } catch (const Error& e) {
      throw Error("stage " + std::to_string(i + 1) + " (" + stages[i].name + "): " + e.what());
    }
  }
  const auto started = std::chrono::steady_clock::now();
  if (output.has_parent_path()) std::filesystem::create_directories(output.parent_path());

  ScratchDir scratch(scratch_parent, "pipeline");
  StageContext ctx = base_ctx;
  if (ctx.sort.tmpdir.empty()) ctx.sort.tmpdir = scratch.path();

  std::filesystem::path previous;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const Stage& stage = stages[i];
    const bool last = i + 1 == stages.size();
    const auto target = last ? output : scratch.path() / ("stage-" + std::to_string(i + 1));
    try {
      std::unique_ptr<std::istream> in;
      if (i == 0) {
        in = std::make_unique<ConcatInput>(inputs);
      } else {
        in = open_input(previous);
      }
      OutputFile file(target);
      run_stage(stage, *in, file.stream(), ctx);
      file.close();
      if (in->bad()) throw Error("read failure");
    } catch (const Error& e) {
      throw Error("stage " + std::to_string(i + 1) + " (" + stage.name + "): " + e.what());
    }
    if (i > 0) {
      std::error_code ec;
      std::filesystem::remove(previous, ec);
    }
    previous = target;
  }

  PipelineResult result;
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  auto produced = open_input(output);
  result.records = lcnt(*produced);
  return result;
}

PipelineResult run_pipeline(const PipelineSpec& spec, const std::filesystem::path& root,
                            const SortOptions& sort) {
  if (spec.stages.empty()) throw Error("pipeline has no stages");
  std::vector<std::filesystem::path> inputs;
  for (const auto& p : spec.inputs) inputs.push_back(resolve_relative(root, p));
  const auto output = resolve_relative(root, spec.output);
  return run_stages(spec.stages, inputs, output, StageContext{sort, root}, root / ".tmp");
}

std::string pipeline_to_json(const PipelineSpec& spec) {
  nlohmann::json j;
  j["inputs"] = spec.inputs;
  j["output"] = spec.output;
  j["stages"] = nlohmann::json::array();
  for (const auto& s : spec.stages) {
    j["stages"].push_back({{"name", s.name}, {"args", s.args}});
  }
  return j.dump();
}

PipelineSpec pipeline_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    PipelineSpec spec;
    spec.inputs = j.at("inputs").get<std::vector<std::string>>();
    spec.output = j.at("output").get<std::string>();
    for (const auto& s : j.at("stages")) {
      spec.stages.push_back({s.at("name").get<std::string>(),
                             s.at("args").get<std::vector<std::string>>()});
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed pipeline spec: ") + e.what());
  }
}

}  // namespace leanstack
