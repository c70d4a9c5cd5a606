// Copyright 2026 The WeaverForge Authors
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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "weaverforge/llm.hpp"

namespace weaverforge::funcall {

using nlohmann::json;

enum class ParamType { kString, kInt, kFloat, kBool, kEnum };

std::string_view to_string(ParamType t);
// Throws InvalidArgument for anything outside the five kinds.
ParamType parse_param_type(std::string_view s);

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::kString;
  std::vector<std::string> enum_values;
  bool required = false;
  std::string description;

  bool operator==(const ParamSpec&) const = default;
};

struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;

  const ParamSpec* find(std::string_view param) const;
  bool operator==(const ToolSpec&) const = default;
};

struct ToolEnvironment {
  std::string id;
  std::string theme;
  std::vector<ToolSpec> tools;

  const ToolSpec* find(std::string_view tool) const;
  bool operator==(const ToolEnvironment&) const = default;
};

// Invariant problems of an environment: empty tool list, bad or duplicate
// tool names, duplicate parameter names, enum parameters without values.
std::vector<std::string> check_environment(const ToolEnvironment& env);

struct ToolCall {
  std::string tool_name;
  json arguments = json::object();

  bool operator==(const ToolCall&) const = default;
};

struct FunctionCallSample {
  std::string id;
  std::string environment_id;
  std::string situation;
  std::string instruction;
  ToolCall gold_call;

  bool operator==(const FunctionCallSample&) const = default;
};

void to_json(json& j, const ParamSpec& p);
void from_json(const json& j, ParamSpec& p);
void to_json(json& j, const ToolSpec& t);
void from_json(const json& j, ToolSpec& t);
void to_json(json& j, const ToolEnvironment& e);
void from_json(const json& j, ToolEnvironment& e);
void to_json(json& j, const ToolCall& c);
void from_json(const json& j, ToolCall& c);
void to_json(json& j, const FunctionCallSample& s);
void from_json(const json& j, FunctionCallSample& s);

enum class ViolationKind { kUnknownTool, kUnknownArgument, kMissingRequired, kTypeMismatch, kEnumViolation };

std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::string param;
  std::string message;
};

/// Every way the call departs from the spec; empty means the call is valid.
/// Integers are accepted where a float is expected, never the reverse.
std::vector<Violation> validate_call(const ToolCall& call, const ToolSpec& spec);

std::string describe(const std::vector<Violation>& violations);

// Tool documentation in the JSON shape the environment prompt asks for.
json tool_document(const ToolSpec& tool);

/// Parses an environment reply. The JSON object may be wrapped in prose or
/// a code fence. Throws ParseFailure (raw reply as detail) for malformed
/// JSON or any invariant problem.
ToolEnvironment parse_environment(std::string_view raw, std::string id);

struct LlmOptions {
  std::string model;
  double temperature = 0.7;
  std::uint64_t seed = 0;
  const llm::TemplateStore* templates = nullptr;
};

// Environment id derived from the theme.
std::string environment_id(std::string_view theme);

ToolEnvironment synth_environment(std::string_view theme, llm::Gateway& gateway, const LlmOptions& options = {});

// Seeded uniform choice of a tool index.
std::size_t pick_tool(const ToolEnvironment& env, std::uint64_t seed);

/// Picks a tool, then prompts for a situation, the arguments and finally the
/// user instruction. Arguments that fail validate_call get one re-prompt
/// naming the violations; a second failure throws SampleRejected.
FunctionCallSample synth_sample(const ToolEnvironment& env, std::uint64_t seed, llm::Gateway& gateway,
                                const LlmOptions& options = {}, std::string sample_id = {});

// OpenAI-style record: tool schemas, the user turn and the assistant's
// tool call.
json to_openai_record(const FunctionCallSample& sample, const ToolEnvironment& env);

struct FuncallOptions {
  std::size_t per_env = 5;
  std::uint64_t seed = 0;
  LlmOptions llm;
  std::size_t workers = 4;
};

struct Failure {
  std::string theme;
  std::string sample_id;
  std::string error;
  std::string transcript;
};

void to_json(json& j, const Failure& f);

struct FuncallResult {
  std::vector<ToolEnvironment> environments;
  std::vector<FunctionCallSample> samples;
  std::vector<Failure> failures;
};

// One environment per theme and per_env samples for each. Environment and
// sample failures are recorded and do not stop the run.
FuncallResult run(const std::vector<std::string>& themes, llm::Gateway& gateway, const FuncallOptions& options);

}  // namespace weaverforge::funcall
