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

#include <gtest/gtest.h>

#include <map>

#include "test_util.hpp"
#include "weaverforge/error.hpp"
#include "weaverforge/funcall.hpp"

namespace wf = weaverforge;
namespace fc = weaverforge::funcall;
using wf::json;
using wf_test::scripted_gateway;

namespace {

const char* kWeatherEnv = R"({"theme": "weather", "tools": [
  {"name": "get_forecast", "description": "Forecast for a city.", "parameters": [
    {"name": "city", "type": "string", "required": true, "description": "City name."},
    {"name": "days", "type": "int", "required": false, "description": "Days ahead."},
    {"name": "units", "type": "enum", "enum": ["metric", "imperial"], "required": false, "description": "Units."}]},
  {"name": "get_alerts", "description": "Active weather alerts.", "parameters": [
    {"name": "region", "type": "string", "required": true, "description": "Region code."},
    {"name": "severe_only", "type": "bool", "required": false, "description": "Only severe alerts."}]},
  {"name": "air_quality", "description": "Air quality index.", "parameters": [
    {"name": "lat", "type": "float", "required": true, "description": "Latitude."},
    {"name": "lon", "type": "float", "required": true, "description": "Longitude."}]}
]})";

fc::ToolSpec forecast_spec() {
  return fc::parse_environment(kWeatherEnv, "env-weather").tools.at(0);
}

std::vector<fc::ViolationKind> kinds(const std::vector<fc::Violation>& v) {
  std::vector<fc::ViolationKind> out;
  for (const auto& x : v) out.push_back(x.kind);
  return out;
}

fc::ToolEnvironment n_tool_env(std::size_t n) {
  fc::ToolEnvironment env;
  env.id = "env-n" + std::to_string(n);
  env.theme = "test";
  for (std::size_t i = 0; i < n; ++i) {
    fc::ToolSpec t;
    t.name = "tool_" + std::to_string(i);
    t.description = "Tool " + std::to_string(i) + ".";
    t.params.push_back({"x", fc::ParamType::kString, {}, true, "Value."});
    env.tools.push_back(t);
  }
  return env;
}

}  // namespace

TEST(Funcall, ParsesScriptedWeatherEnvironment) {
  auto gw = scripted_gateway(wf::llm::ResponseScript({{"funcall_environment", "", kWeatherEnv}}));
  auto env = fc::synth_environment("weather", *gw);
  EXPECT_EQ(env.theme, "weather");
  ASSERT_EQ(env.tools.size(), 3u);
  EXPECT_EQ(env.tools[0].name, "get_forecast");
  EXPECT_EQ(env.tools[0].params[2].type, fc::ParamType::kEnum);
  EXPECT_EQ(env.tools[0].params[2].enum_values, (std::vector<std::string>{"metric", "imperial"}));
  EXPECT_FALSE(env.id.empty());
}

TEST(Funcall, EnvironmentInsideProseAndFencesStillParses) {
  const std::string wrapped = std::string("Here you go:\n```json\n") + kWeatherEnv + "\n```\n";
  EXPECT_EQ(fc::parse_environment(wrapped, "e").tools.size(), 3u);
}

TEST(Funcall, DuplicateToolNamesAreParseFailure) {
  const std::string raw = R"({"theme": "t", "tools": [
    {"name": "a", "description": "A.", "parameters": []},
    {"name": "a", "description": "B.", "parameters": []}]})";
  auto gw = scripted_gateway(wf::llm::ResponseScript({{"funcall_environment", "", raw}}));
  try {
    fc::synth_environment("t", *gw);
    FAIL() << "expected ParseFailure";
  } catch (const wf::Error& e) {
    EXPECT_EQ(e.code(), wf::ErrorCode::kParseFailure);
    EXPECT_NE(e.detail().find("\"a\""), std::string::npos) << "transcript retained";
  }
}

TEST(Funcall, MissingParamsArrayIsParseFailure) {
  const std::string raw = R"({"theme": "t", "tools": [{"name": "a", "description": "A."}]})";
  try {
    fc::parse_environment(raw, "e");
    FAIL();
  } catch (const wf::Error& e) {
    EXPECT_EQ(e.code(), wf::ErrorCode::kParseFailure);
  }
}

TEST(Funcall, InvariantViolationsAreParseFailures) {
  const std::vector<std::string> bad = {
      R"({"theme": "t", "tools": []})",
      R"(not json at all)",
      R"({"theme": "t", "tools": [{"name": "a", "description": "A.", "parameters": [
          {"name": "p", "type": "enum", "enum": [], "required": true, "description": "P."}]}]})",
      R"({"theme": "t", "tools": [{"name": "a", "description": "A.", "parameters": [
          {"name": "p", "type": "string", "required": true, "description": "P."},
          {"name": "p", "type": "int", "required": false, "description": "Q."}]}]})",
      R"({"theme": "t", "tools": [{"name": "a", "description": "A.", "parameters": [
          {"name": "p", "type": "object", "required": true, "description": "P."}]}]})",
      R"({"theme": "t", "tools": [{"name": "bad name!", "description": "A.", "parameters": []}]})",
  };
  for (const auto& raw : bad) {
    try {
      fc::parse_environment(raw, "e");
      ADD_FAILURE() << raw;
    } catch (const wf::Error& e) {
      EXPECT_EQ(e.code(), wf::ErrorCode::kParseFailure) << raw;
      EXPECT_EQ(e.detail(), raw);
    }
  }
}

TEST(Funcall, ExactCallValidates) {
  fc::ToolCall call{"get_forecast", json{{"city", "Oslo"}, {"days", 3}, {"units", "metric"}}};
  EXPECT_TRUE(fc::validate_call(call, forecast_spec()).empty());
  call.arguments = json{{"city", "Oslo"}};
  EXPECT_TRUE(fc::validate_call(call, forecast_spec()).empty());
}

TEST(Funcall, ReportsEveryViolationKind) {
  const auto spec = forecast_spec();
  EXPECT_EQ(kinds(fc::validate_call({"get_forecast", json{{"city", "Oslo"}, {"wind", true}}}, spec)),
            (std::vector{fc::ViolationKind::kUnknownArgument}));
  EXPECT_EQ(kinds(fc::validate_call({"get_forecast", json{{"days", 2}}}, spec)),
            (std::vector{fc::ViolationKind::kMissingRequired}));
  EXPECT_EQ(kinds(fc::validate_call({"get_forecast", json{{"city", "Oslo"}, {"days", "abc"}}}, spec)),
            (std::vector{fc::ViolationKind::kTypeMismatch}));
  EXPECT_EQ(kinds(fc::validate_call({"get_forecast", json{{"city", "Oslo"}, {"units", "kelvin"}}}, spec)),
            (std::vector{fc::ViolationKind::kEnumViolation}));
  // All at once, each reported.
  auto all = fc::validate_call({"get_forecast", json{{"days", 1.5}, {"units", "x"}, {"extra", 1}}}, spec);
  EXPECT_EQ(all.size(), 4u);
}

TEST(Funcall, TypeRules) {
  fc::ToolSpec t;
  t.name = "t";
  t.description = "T.";
  t.params = {{"i", fc::ParamType::kInt, {}, false, ""},
              {"f", fc::ParamType::kFloat, {}, false, ""},
              {"b", fc::ParamType::kBool, {}, false, ""},
              {"s", fc::ParamType::kString, {}, false, ""}};
  auto ok = [&](json args) { return fc::validate_call({"t", std::move(args)}, t).empty(); };
  EXPECT_TRUE(ok({{"i", -4}, {"f", 2}, {"b", false}, {"s", ""}}));
  EXPECT_TRUE(ok({{"f", 2.5}}));
  EXPECT_FALSE(ok({{"i", 2.5}}));
  EXPECT_FALSE(ok({{"i", true}}));
  EXPECT_FALSE(ok({{"b", 1}}));
  EXPECT_FALSE(ok({{"s", 1}}));
  EXPECT_FALSE(ok({{"s", nullptr}}));
  EXPECT_FALSE(fc::validate_call({"t", json::array()}, t).empty());
}

TEST(Funcall, WrongToolNameIsReported) {
  auto v = fc::validate_call({"other", json::object()}, forecast_spec());
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].kind, fc::ViolationKind::kUnknownTool);
}

TEST(Funcall, SingleToolAlwaysChosen) {
  auto env = n_tool_env(1);
  for (std::uint64_t seed = 0; seed < 50; ++seed) EXPECT_EQ(fc::pick_tool(env, seed), 0u);
  auto gw = wf_test::default_gateway();
  auto s = fc::synth_sample(env, 9, *gw);
  EXPECT_EQ(s.gold_call.tool_name, "tool_0");
}

TEST(Funcall, SeededPickIsUniform) {
  auto env = n_tool_env(4);
  std::map<std::size_t, int> counts;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) ++counts[fc::pick_tool(env, seed)];
  ASSERT_EQ(counts.size(), 4u);
  for (auto [tool, n] : counts) {
    const double f = n / 10000.0;
    EXPECT_GE(f, 0.22) << tool;
    EXPECT_LE(f, 0.28) << tool;
  }
}

TEST(Funcall, ThreePromptsInOrder) {
  auto rec = std::make_shared<wf_test::RecordingBackend>(wf::llm::mock_backend(3));
  wf::llm::Gateway gw(rec);
  auto env = fc::parse_environment(kWeatherEnv, "env-weather");
  auto s = fc::synth_sample(env, 5, gw);
  const auto reqs = rec->requests();
  ASSERT_EQ(reqs.size(), 3u);
  EXPECT_EQ(reqs[0].template_id, "funcall_situation");
  EXPECT_EQ(reqs[1].template_id, "funcall_arguments");
  EXPECT_EQ(reqs[2].template_id, "funcall_instruction");
  EXPECT_NE(reqs[1].messages.back().content.find(s.situation), std::string::npos);
  EXPECT_EQ(s.environment_id, "env-weather");
  EXPECT_FALSE(s.instruction.empty());
  const auto* tool = env.find(s.gold_call.tool_name);
  ASSERT_NE(tool, nullptr);
  EXPECT_TRUE(fc::validate_call(s.gold_call, *tool).empty());
}

TEST(Funcall, InvalidArgumentsGetOneRepromptThenReject) {
  auto env = n_tool_env(1);
  // Always missing the required parameter.
  wf::llm::ResponseScript bad({{"funcall_arguments", "", "{\"y\": 1}"}});
  auto rec = std::make_shared<wf_test::RecordingBackend>(wf::llm::mock_backend(1, bad));
  wf::llm::Gateway gw(rec);
  try {
    fc::synth_sample(env, 1, gw);
    FAIL();
  } catch (const wf::Error& e) {
    EXPECT_EQ(e.code(), wf::ErrorCode::kSampleRejected);
  }
  int argument_calls = 0;
  for (const auto& r : rec->requests()) argument_calls += r.template_id == "funcall_arguments";
  EXPECT_EQ(argument_calls, 2);
  EXPECT_NE(rec->requests().back().messages.back().content.find("missing_required"), std::string::npos);
}

TEST(Funcall, RepromptCanRecover) {
  auto env = n_tool_env(1);
  wf::llm::ResponseScript script;
  // The first attempt has no feedback and gets a bad type; the retry is fixed.
  script.add({"funcall_arguments", "rejected", "{\"x\": \"fixed\"}"});
  script.add({"funcall_arguments", "", "{\"x\": 12}"});
  auto gw = scripted_gateway(script);
  auto s = fc::synth_sample(env, 1, *gw);
  EXPECT_EQ(s.gold_call.arguments, (json{{"x", "fixed"}}));
}

TEST(Funcall, IntGivenAsStringIsTypeFailure) {
  auto env = fc::parse_environment(kWeatherEnv, "e");
  fc::ToolEnvironment only;
  only.id = "e1";
  only.theme = "weather";
  only.tools = {env.tools[0]};
  auto gw = scripted_gateway(
      wf::llm::ResponseScript({{"funcall_arguments", "", R"({"city": "Oslo", "days": "abc"})"}}));
  try {
    fc::synth_sample(only, 1, *gw);
    FAIL();
  } catch (const wf::Error& e) {
    EXPECT_EQ(e.code(), wf::ErrorCode::kSampleRejected);
    EXPECT_NE(std::string(e.what()).find("type_mismatch"), std::string::npos);
  }
}

TEST(Funcall, OpenAIRecordShape) {
  auto env = fc::parse_environment(kWeatherEnv, "env-weather");
  fc::FunctionCallSample s{"env-weather/0", "env-weather", "It may rain.", "Will it rain in Oslo?",
                           {"get_forecast", json{{"city", "Oslo"}}}};
  const json r = fc::to_openai_record(s, env);
  ASSERT_EQ(r["tools"].size(), 3u);
  const json& fn = r["tools"][0]["function"];
  EXPECT_EQ(r["tools"][0]["type"], "function");
  EXPECT_EQ(fn["parameters"]["properties"]["days"]["type"], "integer");
  EXPECT_EQ(fn["parameters"]["properties"]["units"]["enum"], (json{"metric", "imperial"}));
  EXPECT_EQ(fn["parameters"]["required"], (json{"city"}));
  EXPECT_EQ(r["messages"][0]["role"], "user");
  EXPECT_EQ(r["messages"][0]["content"], "Will it rain in Oslo?");
  const json& call = r["messages"][1]["tool_calls"][0]["function"];
  EXPECT_EQ(call["name"], "get_forecast");
  EXPECT_EQ(json::parse(call["arguments"].get<std::string>()), (json{{"city", "Oslo"}}));
}

TEST(Funcall, JsonRoundTrip) {
  auto env = fc::parse_environment(kWeatherEnv, "env-weather");
  EXPECT_EQ(json(env).get<fc::ToolEnvironment>(), env);
  fc::FunctionCallSample s{"a", "b", "c", "d", {"get_forecast", json{{"city", "Oslo"}}}};
  EXPECT_EQ(json(s).get<fc::FunctionCallSample>(), s);
}

TEST(Funcall, RunIsDeterministicAndEverySampleValidates) {
  fc::FuncallOptions opts;
  opts.per_env = 5;
  opts.seed = 42;
  const std::vector<std::string> themes = {"travel booking", "home automation", "library catalogue"};
  auto a = fc::run(themes, *wf_test::default_gateway(7), opts);
  auto b = fc::run(themes, *wf_test::default_gateway(7), opts);
  ASSERT_EQ(a.environments.size(), 3u);
  ASSERT_EQ(a.samples.size(), 15u);
  EXPECT_TRUE(a.failures.empty());
  EXPECT_EQ(json(a.samples).dump(), json(b.samples).dump());
  std::map<std::string, const fc::ToolEnvironment*> by_id;
  for (const auto& e : a.environments) by_id[e.id] = &e;
  for (const auto& s : a.samples) {
    const auto* tool = by_id.at(s.environment_id)->find(s.gold_call.tool_name);
    ASSERT_NE(tool, nullptr);
    EXPECT_TRUE(fc::validate_call(s.gold_call, *tool).empty()) << s.id;
  }
}

TEST(Funcall, RunRecordsFailuresWithoutStopping) {
  wf::llm::ResponseScript script = wf::llm::ResponseScript::pipeline_defaults();
  script.prepend({"funcall_environment", "broken", "{\"tools\": 3}"});
  fc::FuncallOptions opts;
  opts.per_env = 2;
  auto r = fc::run({"broken theme", "fine theme"}, *scripted_gateway(script), opts);
  EXPECT_EQ(r.environments.size(), 1u);
  EXPECT_EQ(r.samples.size(), 2u);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].theme, "broken theme");
  EXPECT_FALSE(r.failures[0].transcript.empty());
}
