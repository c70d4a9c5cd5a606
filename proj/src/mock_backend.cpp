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

// Deterministic offline backend.
//
// Script fills are plain text with {{...}} placeholders:
//
//   {{name}}            value of request var `name`
//   {{mutate:name}}     small deterministic perturbation of the var (a short
//                       window of characters reversed); never equal to input
//   {{sentences:name}}  first sentences of the var as "- " bullet lines
//   {{pick:name}}       one item of a '|' separated var
//   {{first:name}}      first item of a '|' separated var
//   {{randint:a:b}}     integer in [a, b]
//   {{hash}}            8 hex digits of the request hash
//   {{environment:name}} tool-environment JSON for the theme in var `name`
//   {{args_for:name}}   schema-valid arguments for the tool JSON in `name`
//
// Every random draw is keyed on (seed, request hash, placeholder index), so
// identical requests always produce identical bytes.

#include <algorithm>

#include "weaverforge/error.hpp"
#include "weaverforge/jsonl.hpp"
#include "weaverforge/llm.hpp"
#include "weaverforge/rng.hpp"
#include "weaverforge/text.hpp"

namespace weaverforge::llm {
namespace {

constexpr std::string_view kFillerWords[] = {
    "draft", "scene", "voice", "rhythm", "detail", "image", "tension", "reader", "motive", "texture",
    "pace", "turn", "thread", "echo", "frame", "margin"};

std::string mutate(std::string_view input, SplitMix64& rng) {
  std::u32string cps = text::decode_utf8(input);
  if (cps.empty()) return "x";
  const std::size_t n = cps.size();
  const std::size_t w = std::max<std::size_t>(2, n / 12);
  if (w >= n) {
    cps.push_back(U'!');
    return text::encode_utf8(cps);
  }
  const std::size_t p = rng.below(n - w + 1);
  const std::u32string before = cps;
  std::reverse(cps.begin() + static_cast<std::ptrdiff_t>(p), cps.begin() + static_cast<std::ptrdiff_t>(p + w));
  if (cps == before) cps.insert(cps.begin() + static_cast<std::ptrdiff_t>(p), U'~');
  return text::encode_utf8(cps);
}

std::string bullet_sentences(std::string_view input) {
  std::string out;
  std::size_t n = 0;
  for (const auto& r : text::sentence_ranges(input)) {
    if (n++ == 4) break;
    if (!out.empty()) out += '\n';
    out += "- ";
    out += r.of(input);
  }
  if (out.empty()) out = "- " + std::string(input);
  return out;
}

std::string slug(std::string_view theme) {
  std::string out;
  for (char c : theme) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%08llx",
                  static_cast<unsigned long long>(text::fnv1a64(theme) & 0xffffffffULL));
    out = "env_" + std::string(buf);
  }
  return out;
}

std::string environment_json(std::string_view theme) {
  const std::string s = slug(theme);
  const std::string t(theme);
  json tools = json::array();
  tools.push_back({{"name", s + "_search"},
                   {"description", "Search records related to " + t + "."},
                   {"parameters",
                    {{{"name", "query"}, {"type", "string"}, {"required", true}, {"description", "Search terms."}},
                     {{"name", "limit"}, {"type", "int"}, {"required", false}, {"description", "Maximum results."}}}}});
  tools.push_back(
      {{"name", s + "_create"},
       {"description", "Create a new entry for " + t + "."},
       {"parameters",
        {{{"name", "title"}, {"type", "string"}, {"required", true}, {"description", "Entry title."}},
         {{"name", "priority"}, {"type", "enum"}, {"enum", {"low", "medium", "high"}}, {"required", true},
          {"description", "Priority level."}},
         {{"name", "draft"}, {"type", "bool"}, {"required", false}, {"description", "Save as draft."}}}}});
  tools.push_back(
      {{"name", s + "_estimate"},
       {"description", "Estimate the cost of an action in " + t + "."},
       {"parameters",
        {{{"name", "amount"}, {"type", "float"}, {"required", true}, {"description", "Base amount."}},
         {{"name", "currency"}, {"type", "enum"}, {"enum", {"USD", "CNY", "EUR"}}, {"required", false},
          {"description", "Currency code."}}}}});
  return json{{"theme", t}, {"tools", tools}}.dump(2);
}

std::string args_for(std::string_view tool_json, SplitMix64& rng) {
  json tool;
  try {
    tool = json::parse(tool_json);
  } catch (const json::exception&) {
    return "{}";
  }
  json args = json::object();
  if (!tool.contains("parameters") || !tool["parameters"].is_array()) return args.dump();
  for (const auto& p : tool["parameters"]) {
    const std::string name = p.value("name", "");
    const std::string type = p.value("type", "string");
    const bool required = p.value("required", false);
    if (name.empty() || (!required && rng.below(2) == 0)) continue;
    if (type == "int") {
      args[name] = static_cast<std::int64_t>(1 + rng.below(20));
    } else if (type == "float") {
      args[name] = 0.5 + static_cast<double>(rng.below(400)) / 4.0;
    } else if (type == "bool") {
      args[name] = rng.below(2) == 1;
    } else if (type == "enum" && p.contains("enum") && p["enum"].is_array() && !p["enum"].empty()) {
      args[name] = p["enum"][rng.below(p["enum"].size())];
    } else {
      char buf[9];
      std::snprintf(buf, sizeof buf, "%04llx", static_cast<unsigned long long>(rng.below(0x10000)));
      args[name] = name + "-" + buf;
    }
  }
  return args.dump();
}

std::string var_or_empty(const ChatRequest& req, const std::string& name) {
  auto it = req.vars.find(name);
  return it == req.vars.end() ? std::string{} : it->second;
}

std::string render_fill(std::string_view fill, const ChatRequest& req, std::uint64_t seed,
                        const std::string& request_hash) {
  std::string out;
  std::size_t pos = 0;
  std::uint64_t index = 0;
  while (true) {
    const auto open = fill.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(fill.substr(pos));
      return out;
    }
    const auto close = fill.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(fill.substr(pos));
      return out;
    }
    out.append(fill.substr(pos, open - pos));
    const auto parts = text::split(fill.substr(open + 2, close - open - 2), ':');
    SplitMix64 rng(derive_seed(seed, request_hash + "#" + std::to_string(index++)));
    const std::string& op = parts[0];
    const std::string arg = parts.size() > 1 ? parts[1] : std::string{};
    if (parts.size() == 1 && op == "hash") {
      out += request_hash.substr(0, 8);
    } else if (parts.size() == 1) {
      out += var_or_empty(req, op);
    } else if (op == "mutate") {
      out += mutate(var_or_empty(req, arg), rng);
    } else if (op == "sentences") {
      out += bullet_sentences(var_or_empty(req, arg));
    } else if (op == "pick" || op == "first") {
      const auto items = text::split(var_or_empty(req, arg), '|');
      out += op == "first" ? items.front() : items[rng.below(items.size())];
    } else if (op == "randint" && parts.size() == 3) {
      const long lo = std::stol(parts[1]);
      const long hi = std::stol(parts[2]);
      out += std::to_string(lo + static_cast<long>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))));
    } else if (op == "environment") {
      out += environment_json(var_or_empty(req, arg));
    } else if (op == "args_for") {
      out += args_for(var_or_empty(req, arg), rng);
    } else {
      out.append(fill.substr(open, close + 2 - open));
    }
    pos = close + 2;
  }
}

std::string rendered_messages(const ChatRequest& req) {
  std::string all;
  for (const auto& m : req.messages) {
    all += m.content;
    all += '\n';
  }
  return all;
}

}  // namespace

// ---------------------------------------------------------------------------

ResponseScript& ResponseScript::add(ScriptEntry entry) {
  entries_.push_back(std::move(entry));
  return *this;
}

ResponseScript& ResponseScript::prepend(ScriptEntry entry) {
  entries_.insert(entries_.begin(), std::move(entry));
  return *this;
}

const ScriptEntry* ResponseScript::match(const ChatRequest& req) const {
  std::string all;
  bool have_all = false;
  for (const auto& e : entries_) {
    if (e.template_id != req.template_id) continue;
    if (e.contains.empty()) return &e;
    if (!have_all) {
      all = rendered_messages(req);
      have_all = true;
    }
    if (all.find(e.contains) != std::string::npos) return &e;
  }
  return nullptr;
}

std::string ResponseScript::fingerprint() const {
  json j = json::array();
  for (const auto& e : entries_) j.push_back({e.template_id, e.contains, e.fill});
  return text::sha256_hex(j.dump()).substr(0, 12);
}

ResponseScript ResponseScript::load(const fs::path& path) {
  const json j = json::parse(io::read_file(path));
  const json& entries = j.is_array() ? j : j.at("entries");
  ResponseScript script;
  for (const auto& e : entries) {
    script.add({e.at("template").get<std::string>(), e.value("contains", std::string{}),
                e.at("fill").get<std::string>()});
  }
  return script;
}

ResponseScript ResponseScript::pipeline_defaults() {
  ResponseScript s;
  const auto bt = [&](std::string_view task, std::string fill) {
    s.add({"backtranslate/" + std::string(task), "", std::move(fill)});
  };
  bt("ContentWriting",
     "[RATIONALE]\nThe selected span stands on its own as a {{domain}} passage, so the instruction asks "
     "for it directly and states its subject.\n[INSTRUCTION]\nWrite a {{subdomain}} passage in the voice "
     "of the excerpt (ref {{hash}}).\n[RESPONSE]\n{{span}}");
  bt("Outlining",
     "[RATIONALE]\nAn outline can be recovered from the span's sentence order.\n[INSTRUCTION]\nDraft an "
     "outline for a {{subdomain}} piece (ref {{hash}}).\n[RESPONSE]\n{{sentences:span}}");
  bt("PolishingEditing",
     "[RATIONALE]\nA rougher variant of the span serves as the text to polish.\n[CONTEXT]\n{{mutate:span}}\n"
     "[INSTRUCTION]\nPolish the following {{subdomain}} text and fix its awkward phrasing (ref {{hash}}).\n"
     "[RESPONSE]\n{{span}}");
  bt("StyleTransfer",
     "[RATIONALE]\nThe span is restated as a list of beats.\n[CONTEXT]\n{{span}}\n[INSTRUCTION]\nRewrite "
     "the passage as a list of script beats (ref {{hash}}).\n[RESPONSE]\n{{sentences:span}}");
  bt("ExpandSimplify",
     "[RATIONALE]\nThe span condenses to its leading sentences.\n[CONTEXT]\n{{span}}\n[INSTRUCTION]\n"
     "Summarize the passage in a few short points (ref {{hash}}).\n[RESPONSE]\n{{sentences:span}}");
  bt("Brainstorming",
     "[RATIONALE]\nEach sentence of the span suggests a direction.\n[INSTRUCTION]\nBrainstorm ideas for "
     "a {{subdomain}} piece (ref {{hash}}).\n[RESPONSE]\n{{sentences:span}}");
  bt("Reviewing",
     "[RATIONALE]\nReview comments are anchored on the span's sentences.\n[CONTEXT]\n{{span}}\n"
     "[INSTRUCTION]\nReview this passage and point out what works (ref {{hash}}).\n[RESPONSE]\n"
     "{{sentences:span}}");
  bt("InstructionAnnotation",
     "[RATIONALE]\nThe span answers a request for a {{domain}} passage.\n[INSTRUCTION]\nWrite a "
     "{{subdomain}} passage matching this description (ref {{hash}}).\n[RESPONSE]\n{{span}}");
  s.add({"score", "", "quality: {{randint:5:10}}\ndiversity: {{randint:4:10}}\nrelevance: {{randint:5:10}}"});
  s.add({"cdpo_attribute", "",
         "[PRINCIPLE]\n{{pick:candidate_ids}}\n[RATIONALE]\nThe response follows this principle closely."});
  s.add({"cdpo_perturb", "",
         "[RATIONALE]\nA short passage is scrambled so the text breaks the principle.\n[REVISED]\n"
         "{{mutate:chosen}}"});
  s.add({"funcall_environment", "", "{{environment:theme}}"});
  s.add({"funcall_situation", "",
         "Someone working on {{theme}} needs {{tool_name}} right now (case {{hash}})."});
  s.add({"funcall_arguments", "", "{{args_for:tool}}"});
  s.add({"funcall_instruction", "", "{{situation}} Please take care of it with the available tools."});
  s.add({"judge", "", "style: {{randint:5:10}}\nrelevance: {{randint:5:10}}\ncreativity: {{randint:4:9}}"});
  return s;
}

// ---------------------------------------------------------------------------

MockBackend::MockBackend(std::uint64_t seed, ResponseScript script)
    : seed_(seed), script_(std::move(script)) {
  name_ = "mock:" + std::to_string(seed_);
  if (!script_.empty()) name_ += "+" + script_.fingerprint();
}

std::string MockBackend::name() const { return name_; }

ChatResponse MockBackend::send(const ChatRequest& req) const {
  validate(req);
  ChatResponse resp;
  resp.backend = name_;
  for (const auto& m : req.messages) resp.usage.prompt_tokens += estimate_tokens(m.content);

  const auto& last = req.messages.back().content;
  if (std::string_view(last).substr(0, kEchoDirective.size()) == kEchoDirective) {
    std::string_view rest = std::string_view(last).substr(kEchoDirective.size());
    if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    resp.content = std::string(rest);
  } else {
    const std::string request_hash = cache_key(req, "");
    if (const ScriptEntry* entry = script_.match(req)) {
      resp.content = render_fill(entry->fill, req, seed_, request_hash);
    } else {
      SplitMix64 rng(derive_seed(seed_, request_hash));
      resp.content = "mock-" + request_hash.substr(0, 8) + ":";
      for (int i = 0; i < 12; ++i) {
        resp.content += ' ';
        resp.content += kFillerWords[rng.below(std::size(kFillerWords))];
      }
    }
  }
  resp.usage.completion_tokens = estimate_tokens(resp.content);
  return resp;
}

std::shared_ptr<Backend> mock_backend(std::uint64_t seed, std::optional<ResponseScript> script) {
  return std::make_shared<MockBackend>(seed, script ? std::move(*script) : ResponseScript::pipeline_defaults());
}

}  // namespace weaverforge::llm
