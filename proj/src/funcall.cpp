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

#include "weaverforge/funcall.hpp"

#include <cstdio>
#include <regex>
#include <set>

#include "weaverforge/error.hpp"
#include "weaverforge/parallel.hpp"
#include "weaverforge/rng.hpp"
#include "weaverforge/text.hpp"

namespace weaverforge::funcall {

std::string_view to_string(ParamType t) {
  switch (t) {
    case ParamType::kString: return "string";
    case ParamType::kInt: return "int";
    case ParamType::kFloat: return "float";
    case ParamType::kBool: return "bool";
    case ParamType::kEnum: return "enum";
  }
  return "string";
}

ParamType parse_param_type(std::string_view s) {
  for (auto t : {ParamType::kString, ParamType::kInt, ParamType::kFloat, ParamType::kBool, ParamType::kEnum}) {
    if (to_string(t) == s) return t;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown parameter type '" + std::string(s) + "'");
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kUnknownTool: return "unknown_tool";
    case ViolationKind::kUnknownArgument: return "unknown_argument";
    case ViolationKind::kMissingRequired: return "missing_required";
    case ViolationKind::kTypeMismatch: return "type_mismatch";
    case ViolationKind::kEnumViolation: return "enum_violation";
  }
  return "unknown_argument";
}

const ParamSpec* ToolSpec::find(std::string_view param) const {
  for (const auto& p : params) {
    if (p.name == param) return &p;
  }
  return nullptr;
}

const ToolSpec* ToolEnvironment::find(std::string_view tool) const {
  for (const auto& t : tools) {
    if (t.name == tool) return &t;
  }
  return nullptr;
}

std::vector<std::string> check_environment(const ToolEnvironment& env) {
  static const std::regex ident("[A-Za-z_][A-Za-z0-9_-]*");
  std::vector<std::string> problems;
  if (env.tools.empty()) problems.push_back("environment has no tools");
  std::set<std::string> tool_names;
  for (const auto& t : env.tools) {
    if (!std::regex_match(t.name, ident)) problems.push_back("tool name '" + t.name + "' is not an identifier");
    if (!tool_names.insert(t.name).second) problems.push_back("duplicate tool name '" + t.name + "'");
    std::set<std::string> param_names;
    for (const auto& p : t.params) {
      if (p.name.empty()) problems.push_back("tool '" + t.name + "' has a parameter without a name");
      if (!param_names.insert(p.name).second) {
        problems.push_back("tool '" + t.name + "' repeats parameter '" + p.name + "'");
      }
      if (p.type == ParamType::kEnum && p.enum_values.empty()) {
        problems.push_back("enum parameter '" + t.name + "." + p.name + "' lists no values");
      }
    }
  }
  return problems;
}

// ---------------------------------------------------------------------------

void to_json(json& j, const ParamSpec& p) {
  j = json{{"name", p.name}, {"type", to_string(p.type)}};
  if (p.type == ParamType::kEnum) j["enum"] = p.enum_values;
  j["required"] = p.required;
  j["description"] = p.description;
}

void from_json(const json& j, ParamSpec& p) {
  p.name = j.at("name").get<std::string>();
  p.type = parse_param_type(j.at("type").get<std::string>());
  p.enum_values.clear();
  if (p.type == ParamType::kEnum) p.enum_values = j.at("enum").get<std::vector<std::string>>();
  p.required = j.value("required", false);
  p.description = j.value("description", std::string{});
}

void to_json(json& j, const ToolSpec& t) {
  j = json{{"name", t.name}, {"description", t.description}, {"parameters", t.params}};
}

void from_json(const json& j, ToolSpec& t) {
  t.name = j.at("name").get<std::string>();
  t.description = j.value("description", std::string{});
  t.params = j.at("parameters").get<std::vector<ParamSpec>>();
}

void to_json(json& j, const ToolEnvironment& e) {
  j = json{{"id", e.id}, {"theme", e.theme}, {"tools", e.tools}};
}

void from_json(const json& j, ToolEnvironment& e) {
  e.id = j.value("id", std::string{});
  e.theme = j.value("theme", std::string{});
  e.tools = j.at("tools").get<std::vector<ToolSpec>>();
}

void to_json(json& j, const ToolCall& c) { j = json{{"tool_name", c.tool_name}, {"arguments", c.arguments}}; }

void from_json(const json& j, ToolCall& c) {
  c.tool_name = j.at("tool_name").get<std::string>();
  c.arguments = j.at("arguments");
}

void to_json(json& j, const FunctionCallSample& s) {
  j = json{{"id", s.id},
           {"environment_id", s.environment_id},
           {"situation", s.situation},
           {"instruction", s.instruction},
           {"gold_call", s.gold_call}};
}

void from_json(const json& j, FunctionCallSample& s) {
  s.id = j.at("id").get<std::string>();
  s.environment_id = j.at("environment_id").get<std::string>();
  s.situation = j.at("situation").get<std::string>();
  s.instruction = j.at("instruction").get<std::string>();
  s.gold_call = j.at("gold_call").get<ToolCall>();
}

void to_json(json& j, const Failure& f) {
  j = json{{"theme", f.theme}, {"sample_id", f.sample_id}, {"error", f.error}, {"transcript", f.transcript}};
}

// ---------------------------------------------------------------------------

namespace {

bool type_matches(const json& v, ParamType t) {
  switch (t) {
    case ParamType::kString:
    case ParamType::kEnum: return v.is_string();
    case ParamType::kInt: return v.is_number_integer();
    case ParamType::kFloat: return v.is_number();
    case ParamType::kBool: return v.is_boolean();
  }
  return false;
}

}  // namespace

std::vector<Violation> validate_call(const ToolCall& call, const ToolSpec& spec) {
  std::vector<Violation> out;
  if (call.tool_name != spec.name) {
    out.push_back({ViolationKind::kUnknownTool, "", "call names '" + call.tool_name + "', not '" + spec.name + "'"});
  }
  if (!call.arguments.is_object()) {
    out.push_back({ViolationKind::kTypeMismatch, "", "arguments must be a JSON object"});
    return out;
  }
  for (const auto& [name, value] : call.arguments.items()) {
    const ParamSpec* p = spec.find(name);
    if (!p) {
      out.push_back({ViolationKind::kUnknownArgument, name, "no such parameter"});
      continue;
    }
    if (!type_matches(value, p->type)) {
      out.push_back({ViolationKind::kTypeMismatch, name, "expected " + std::string(to_string(p->type)) + ", got " +
                                                             value.dump()});
      continue;
    }
    if (p->type == ParamType::kEnum) {
      const auto& s = value.get_ref<const std::string&>();
      if (std::find(p->enum_values.begin(), p->enum_values.end(), s) == p->enum_values.end()) {
        out.push_back({ViolationKind::kEnumViolation, name, "'" + s + "' is not an allowed value"});
      }
    }
  }
  for (const auto& p : spec.params) {
    if (p.required && !call.arguments.contains(p.name)) {
      out.push_back({ViolationKind::kMissingRequired, p.name, "required parameter is absent"});
    }
  }
  return out;
}

std::string describe(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += to_string(v.kind);
    if (!v.param.empty()) out += "(" + v.param + ")";
    out += ": " + v.message;
  }
  return out;
}

json tool_document(const ToolSpec& tool) { return json(tool); }

namespace {

// The outermost {...} of a reply.
std::optional<json> extract_object(std::string_view raw) {
  const auto open = raw.find('{');
  const auto close = raw.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
  try {
    json j = json::parse(raw.substr(open, close - open + 1));
    if (j.is_object()) return j;
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

const llm::TemplateStore& store_of(const LlmOptions& o) {
  return o.templates ? *o.templates : llm::TemplateStore::builtin();
}

std::string ask(llm::Gateway& gateway, const LlmOptions& o, std::string_view template_id,
                const std::map<std::string, std::string>& vars, std::uint64_t seed) {
  auto req = store_of(o).render(template_id, vars);
  req.model = o.model;
  req.temperature = o.temperature;
  req.seed = static_cast<std::int64_t>(seed & 0x7fffffffffffffffULL);
  return gateway.complete(req).content;
}

}  // namespace

ToolEnvironment parse_environment(std::string_view raw, std::string id) {
  const auto obj = extract_object(raw);
  if (!obj) throw Error(ErrorCode::kParseFailure, "environment reply holds no JSON object", std::string(raw));
  ToolEnvironment env;
  try {
    env = obj->get<ToolEnvironment>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseFailure, std::string("malformed environment: ") + e.what(), std::string(raw));
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseFailure, std::string("malformed environment: ") + e.what(), std::string(raw));
  }
  env.id = std::move(id);
  const auto problems = check_environment(env);
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw Error(ErrorCode::kParseFailure, "invalid environment: " + msg, std::string(raw));
  }
  return env;
}

std::string environment_id(std::string_view theme) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "env-%016llx", static_cast<unsigned long long>(text::fnv1a64(theme)));
  return buf;
}

ToolEnvironment synth_environment(std::string_view theme, llm::Gateway& gateway, const LlmOptions& options) {
  const std::string raw =
      ask(gateway, options, "funcall_environment", {{"theme", std::string(theme)}}, options.seed);
  ToolEnvironment env = parse_environment(raw, environment_id(theme));
  if (env.theme.empty()) env.theme = std::string(theme);
  return env;
}

std::size_t pick_tool(const ToolEnvironment& env, std::uint64_t seed) {
  if (env.tools.empty()) throw Error(ErrorCode::kInvalidArgument, "environment " + env.id + " has no tools");
  SplitMix64 rng(derive_seed(seed, env.id));
  return static_cast<std::size_t>(rng.below(env.tools.size()));
}

FunctionCallSample synth_sample(const ToolEnvironment& env, std::uint64_t seed, llm::Gateway& gateway,
                                const LlmOptions& options, std::string sample_id) {
  const ToolSpec& tool = env.tools.at(pick_tool(env, seed));
  const std::string doc = tool_document(tool).dump(2);

  const std::string situation = std::string(text::trim(
      ask(gateway, options, "funcall_situation", {{"theme", env.theme}, {"tool", doc}, {"tool_name", tool.name}},
          seed)));

  std::string feedback;
  std::string transcript;
  std::optional<ToolCall> call;
  std::string last_problem;
  for (int attempt = 0; attempt < 2 && !call; ++attempt) {
    const std::string raw = ask(gateway, options, "funcall_arguments",
                                {{"tool", doc}, {"situation", situation}, {"feedback", feedback},
                                 {"tool_name", tool.name}},
                                seed);
    transcript += raw + "\n";
    const auto args = extract_object(raw);
    if (!args) {
      last_problem = "reply is not a JSON object";
    } else {
      ToolCall candidate{tool.name, *args};
      const auto violations = validate_call(candidate, tool);
      if (violations.empty()) {
        call = std::move(candidate);
        break;
      }
      last_problem = describe(violations);
    }
    feedback = "\nYour previous arguments were rejected: " + last_problem + "\nPrevious reply: " +
               std::string(text::trim(raw)) + "\n";
  }
  if (!call) {
    throw Error(ErrorCode::kSampleRejected, "arguments for " + tool.name + " failed validation: " + last_problem,
                transcript);
  }

  const std::string instruction = std::string(text::trim(
      ask(gateway, options, "funcall_instruction",
          {{"situation", situation}, {"tool_name", tool.name}, {"arguments", call->arguments.dump()}}, seed)));

  FunctionCallSample s;
  s.id = sample_id.empty() ? env.id + "/" + tool.name : std::move(sample_id);
  s.environment_id = env.id;
  s.situation = situation;
  s.instruction = instruction;
  s.gold_call = std::move(*call);
  return s;
}

json to_openai_record(const FunctionCallSample& sample, const ToolEnvironment& env) {
  json tools = json::array();
  for (const auto& t : env.tools) {
    json properties = json::object();
    json required = json::array();
    for (const auto& p : t.params) {
      json prop;
      switch (p.type) {
        case ParamType::kString: prop["type"] = "string"; break;
        case ParamType::kInt: prop["type"] = "integer"; break;
        case ParamType::kFloat: prop["type"] = "number"; break;
        case ParamType::kBool: prop["type"] = "boolean"; break;
        case ParamType::kEnum:
          prop["type"] = "string";
          prop["enum"] = p.enum_values;
          break;
      }
      prop["description"] = p.description;
      properties[p.name] = std::move(prop);
      if (p.required) required.push_back(p.name);
    }
    tools.push_back({{"type", "function"},
                     {"function",
                      {{"name", t.name},
                       {"description", t.description},
                       {"parameters", {{"type", "object"}, {"properties", properties}, {"required", required}}}}}});
  }
  json call = {{"id", "call_0"},
               {"type", "function"},
               {"function", {{"name", sample.gold_call.tool_name}, {"arguments", sample.gold_call.arguments.dump()}}}};
  json messages = json::array();
  messages.push_back({{"role", "user"}, {"content", sample.instruction}});
  messages.push_back({{"role", "assistant"}, {"content", nullptr}, {"tool_calls", json::array({call})}});
  return json{{"id", sample.id}, {"tools", tools}, {"messages", messages}};
}

FuncallResult run(const std::vector<std::string>& themes, llm::Gateway& gateway, const FuncallOptions& options) {
  std::vector<std::string> unique;
  std::set<std::string> seen;
  for (const auto& t : themes) {
    if (!text::trim(t).empty() && seen.insert(t).second) unique.push_back(t);
  }

  struct EnvOutcome {
    std::optional<ToolEnvironment> env;
    std::optional<Failure> failure;
  };
  auto envs = parallel_map(unique.size(), options.workers, [&](std::size_t i) {
    EnvOutcome out;
    LlmOptions o = options.llm;
    o.seed = derive_seed(options.seed, "env/" + unique[i]);
    try {
      out.env = synth_environment(unique[i], gateway, o);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParseFailure) throw;
      out.failure = Failure{unique[i], "", e.what(), e.detail()};
    }
    return out;
  });

  FuncallResult result;
  for (auto& o : envs) {
    if (o.env) result.environments.push_back(std::move(*o.env));
    if (o.failure) result.failures.push_back(std::move(*o.failure));
  }

  struct Job {
    const ToolEnvironment* env;
    std::size_t k;
  };
  std::vector<Job> jobs;
  for (const auto& env : result.environments) {
    for (std::size_t k = 0; k < options.per_env; ++k) jobs.push_back({&env, k});
  }
  struct SampleOutcome {
    std::optional<FunctionCallSample> sample;
    std::optional<Failure> failure;
  };
  auto samples = parallel_map(jobs.size(), options.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    const std::string id = job.env->id + "/" + std::to_string(job.k);
    SampleOutcome out;
    try {
      out.sample = synth_sample(*job.env, derive_seed(options.seed, id), gateway, options.llm, id);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSampleRejected) throw;
      out.failure = Failure{job.env->theme, id, e.what(), e.detail()};
    }
    return out;
  });
  for (auto& o : samples) {
    if (o.sample) result.samples.push_back(std::move(*o.sample));
    if (o.failure) result.failures.push_back(std::move(*o.failure));
  }
  return result;
}

}  // namespace weaverforge::funcall
