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

#include "weaverforge/synthetic.hpp"

#include <array>
#include <span>

#include "weaverforge/rng.hpp"
#include "weaverforge/text.hpp"

namespace weaverforge::corpus {
namespace {

using Words = std::span<const std::string_view>;

constexpr std::string_view kEnNouns[] = {
    "river", "lantern", "city", "window", "stranger", "garden", "letter", "harbor", "mountain",
    "market", "signal", "memory", "station", "bridge", "forest", "engine", "village", "mirror",
    "storm", "library", "teacher", "captain", "painter", "child", "orchard", "tower", "road",
    "island", "clock", "doorway", "kitchen", "ferry"};
constexpr std::string_view kEnVerbs[] = {
    "remembered", "followed", "crossed", "watched", "carried", "opened", "described", "ignored",
    "repaired", "measured", "answered", "promised", "shaped", "gathered", "noticed", "traded"};
constexpr std::string_view kEnAdjectives[] = {
    "quiet", "bright", "narrow", "ancient", "restless", "distant", "golden", "patient", "hollow",
    "crowded", "gentle", "stubborn", "silver", "careful", "weathered", "unusual"};
constexpr std::string_view kEnLinks[] = {"near", "beyond", "under", "behind", "across", "inside",
                                         "toward", "beside"};

constexpr std::string_view kEnFiction[] = {"dragon", "ghost", "spell", "kingdom", "detective",
                                           "secret", "prophecy", "witch"};
constexpr std::string_view kEnNonfiction[] = {"journey", "interview", "season", "neighborhood",
                                              "habit", "festival", "recipe", "trip"};
constexpr std::string_view kEnMarketing[] = {"product", "customer", "launch", "brand", "discount",
                                             "campaign", "feature", "subscription"};
constexpr std::string_view kEnTechnical[] = {"system", "dataset", "protocol", "experiment",
                                             "benchmark", "module", "specification", "survey"};

constexpr std::string_view kZhNouns[] = {
    "城市", "河流", "灯光", "窗户", "老人", "孩子", "市场", "车站", "桥梁", "森林", "村庄", "镜子",
    "暴风", "图书馆", "老师", "船长", "画家", "果园", "高塔", "道路", "岛屿", "时钟", "厨房", "渡船",
    "信件", "记忆", "山脉", "花园", "港口", "陌生人"};
constexpr std::string_view kZhVerbs[] = {"想起", "跟随", "穿过", "望着", "带走", "打开", "描述", "修好",
                                         "测量", "回答", "承诺", "收集", "注意到", "交换", "守护", "寻找"};
constexpr std::string_view kZhAdjectives[] = {"安静的", "明亮的", "狭窄的", "古老的", "不安的", "遥远的",
                                              "金色的", "耐心的", "空旷的", "拥挤的", "温柔的", "固执的",
                                              "银色的", "谨慎的", "陈旧的", "奇特的"};
constexpr std::string_view kZhLinks[] = {"在", "朝着", "沿着", "越过", "靠近", "围绕"};

constexpr std::string_view kZhFiction[] = {"巨龙", "幽灵", "咒语", "王国", "侦探", "秘密", "预言", "女巫"};
constexpr std::string_view kZhNonfiction[] = {"旅行", "采访", "季节", "街坊", "习惯", "节日", "菜谱", "散步"};
constexpr std::string_view kZhMarketing[] = {"产品", "客户", "发布会", "品牌", "优惠", "活动", "功能", "会员"};
constexpr std::string_view kZhTechnical[] = {"系统", "数据集", "协议", "实验", "基准", "模块", "规范", "调研"};

std::string_view pick(Words words, SplitMix64& rng) { return words[rng.below(words.size())]; }

Words domain_words(Language lang, DomainKind domain) {
  const bool zh = lang == Language::kZh;
  switch (domain) {
    case DomainKind::kFictionWriting: return zh ? Words(kZhFiction) : Words(kEnFiction);
    case DomainKind::kCreativeNonFiction: return zh ? Words(kZhNonfiction) : Words(kEnNonfiction);
    case DomainKind::kMarketingWriting: return zh ? Words(kZhMarketing) : Words(kEnMarketing);
    case DomainKind::kTechnicalWriting: return zh ? Words(kZhTechnical) : Words(kEnTechnical);
  }
  return Words(kEnNouns);
}

std::string sentence(Language lang, DomainKind domain, SplitMix64& rng) {
  const Words topic = domain_words(lang, domain);
  std::string s;
  if (lang == Language::kZh) {
    s += pick(kZhAdjectives, rng);
    s += rng.below(3) == 0 ? pick(topic, rng) : pick(kZhNouns, rng);
    s += pick(kZhLinks, rng);
    s += pick(kZhNouns, rng);
    s += pick(kZhVerbs, rng);
    s += "了";
    s += pick(kZhAdjectives, rng);
    s += rng.below(2) == 0 ? pick(topic, rng) : pick(kZhNouns, rng);
    s += rng.below(5) == 0 ? "，" : "";
    if (rng.below(5) == 0) {
      s += pick(kZhVerbs, rng);
      s += pick(kZhNouns, rng);
    }
    s += rng.below(6) == 0 ? "！" : "。";
    return s;
  }
  std::string first(pick(kEnAdjectives, rng));
  first[0] = static_cast<char>(first[0] - 'a' + 'A');
  s = first + " ";
  s += rng.below(3) == 0 ? pick(topic, rng) : pick(kEnNouns, rng);
  s += ' ';
  s += pick(kEnVerbs, rng);
  s += " the ";
  s += pick(kEnAdjectives, rng);
  s += ' ';
  s += rng.below(2) == 0 ? pick(topic, rng) : pick(kEnNouns, rng);
  s += ' ';
  s += pick(kEnLinks, rng);
  s += " the ";
  s += pick(kEnNouns, rng);
  s += rng.below(6) == 0 ? "!" : ".";
  return s;
}

std::string paragraph(Language lang, DomainKind domain, std::size_t approx_chars, SplitMix64& rng) {
  std::string p;
  while (text::char_count(p) < approx_chars) {
    if (!p.empty() && lang == Language::kEn) p += ' ';
    p += sentence(lang, domain, rng);
  }
  return p;
}

std::string document_text(Language lang, DomainKind domain, SplitMix64& rng) {
  const bool fiction = is_fiction(domain);
  const std::size_t paragraphs = 2 + rng.below(4);
  std::string out;
  for (std::size_t i = 0; i < paragraphs; ++i) {
    if (i > 0) out += "\n\n";
    const std::size_t base = fiction ? 260 : 140;
    out += paragraph(lang, domain, base + rng.below(fiction ? 200 : 160), rng);
  }
  return out;
}

}  // namespace

std::string default_subdomain(DomainKind domain) {
  switch (domain) {
    case DomainKind::kFictionWriting: return "short_story";
    case DomainKind::kCreativeNonFiction: return "blog";
    case DomainKind::kMarketingWriting: return "advertising_copy";
    case DomainKind::kTechnicalWriting: return "report";
  }
  return "misc";
}

std::string synthetic_paragraph(Language lang, DomainKind domain, std::size_t approx_chars,
                                std::uint64_t seed) {
  SplitMix64 rng(seed);
  return paragraph(lang, domain, approx_chars, rng);
}

std::vector<Document> synthetic_corpus(const SyntheticCorpusOptions& options) {
  SplitMix64 rng(derive_seed(options.seed, "synthetic-corpus"));
  std::vector<Document> docs;
  docs.reserve(options.count);
  constexpr std::array<DomainKind, 3> kNonfiction = {
      DomainKind::kCreativeNonFiction, DomainKind::kMarketingWriting, DomainKind::kTechnicalWriting};
  for (std::size_t i = 0; i < options.count; ++i) {
    Document d;
    d.id = options.id_prefix + "-" + std::to_string(i);
    d.domain = rng.unit() < options.fiction_share ? DomainKind::kFictionWriting
                                                  : kNonfiction[rng.below(kNonfiction.size())];
    d.language = rng.unit() < options.zh_share ? Language::kZh : Language::kEn;
    d.subdomain = default_subdomain(d.domain);
    d.source = "synthetic";
    d.popularity = Popularity{1.0 + static_cast<double>(rng.below(400)) / 100.0, rng.below(100000),
                              rng.below(5000), rng.below(800)};
    d.text = document_text(d.language, d.domain, rng);

    if (options.noise_share > 0.0 && i > 0 && rng.unit() < options.noise_share) {
      switch (rng.below(5)) {
        case 0:
          d.text = "Too short.";
          break;
        case 1:
          d.text = "!!! ### $$$ %%% ^^^ &&& *** ((( ))) ~~~ ??? ;;; ::: ,,, ... --- +++ === " + d.text.substr(0, text::byte_offset_of_char(d.text, 20)) +
                   " @@@ ### $$$ %%% ^^^ &&& *** ((( ))) ~~~ !!! ??? ;;; ::: ,,, ... --- +++ === ||| <<< >>> ///";
          break;
        case 2:
          // Label contradicts the script.
          d.language = d.language == Language::kZh ? Language::kEn : Language::kZh;
          break;
        case 3: {
          const auto& base = docs[rng.below(docs.size())];
          d.text = base.text;
          d.language = base.language;
          d.domain = base.domain;
          d.subdomain = base.subdomain;
          break;
        }
        default: {
          const auto& base = docs[rng.below(docs.size())];
          d.language = base.language;
          d.domain = base.domain;
          d.subdomain = base.subdomain;
          d.text = base.text + (d.language == Language::kZh ? "。" : " Indeed.");
          break;
        }
      }
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace weaverforge::corpus
