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

#include "weaverforge/error.hpp"
#include "weaverforge/jsonl.hpp"
#include "weaverforge/llm.hpp"
#include "weaverforge/sections.hpp"

namespace weaverforge::llm {

// Defined in the generated embedded_templates.cpp.
const std::map<std::string, std::string>& embedded_templates();

std::string substitute(std::string_view text, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("{{", pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.append(text.substr(pos, open - pos));
    const std::string name(text.substr(open + 2, close - open - 2));
    auto it = vars.find(name);
    if (it == vars.end()) throw Error(ErrorCode::kTemplateError, "no value for placeholder {{" + name + "}}");
    out += it->second;
    pos = close + 2;
  }
  out.append(text.substr(pos));
  return out;
}

PromptTemplate TemplateStore::parse(std::string id, std::string_view contents) {
  const auto sections = Sections::parse(contents, {"system", "user"});
  auto user = sections.get("user");
  if (!user || user->empty()) {
    throw Error(ErrorCode::kTemplateError, "template '" + id + "' has no [user] section");
  }
  return PromptTemplate{std::move(id), sections.get("system").value_or(""), std::move(*user)};
}

const TemplateStore& TemplateStore::builtin() {
  static const TemplateStore store = [] {
    TemplateStore s;
    for (const auto& [id, body] : embedded_templates()) s.templates_.emplace(id, parse(id, body));
    return s;
  }();
  return store;
}

TemplateStore TemplateStore::with_overrides(const fs::path& dir) {
  TemplateStore s = builtin();
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "template directory " + dir.string() + " not found");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".tmpl") continue;
    const std::string id = entry.path().stem().string();
    s.templates_.insert_or_assign(id, parse(id, io::read_file(entry.path())));
  }
  return s;
}

const PromptTemplate& TemplateStore::get(std::string_view id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw Error(ErrorCode::kTemplateError, "unknown template '" + std::string(id) + "'");
  return it->second;
}

std::vector<std::string> TemplateStore::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

ChatRequest TemplateStore::render(std::string_view id, const std::map<std::string, std::string>& vars,
                                  std::string request_id) const {
  const PromptTemplate& t = get(id);
  ChatRequest req;
  req.template_id = request_id.empty() ? t.id : std::move(request_id);
  if (!t.system.empty()) req.messages.push_back({Role::kSystem, substitute(t.system, vars)});
  req.messages.push_back({Role::kUser, substitute(t.user, vars)});
  req.vars = vars;
  return req;
}

}  // namespace weaverforge::llm
