#include "msa/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "msa/error.hpp"

namespace msa {
namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "intro", "verse", "chorus", "bridge", "inst", "outro", "silence"};

struct TableRow {
  StructuralFunction target;
  std::vector<std::string_view> labels;
};

// HookTheory section labels, one row per target class.
const std::vector<TableRow>& table_rows() {
  static const std::vector<TableRow> rows = {
      {StructuralFunction::kChorus,
       {"chorus", "chorus-lead-out", "theme", "verse-and-chorus", "theme-recap",
        "pre-chorus-and-chorus"}},
      {StructuralFunction::kVerse,
       {"verse", "development", "verse-and-pre-chorus", "pre-chorus"}},
      {StructuralFunction::kInst, {"instrumental", "lead-in-alt", "lead-in", "loop", "solo"}},
      {StructuralFunction::kBridge, {"bridge", "variation"}},
      {StructuralFunction::kIntro, {"intro", "intro-and-chorus", "intro-and-verse"}},
      {StructuralFunction::kOutro, {"outro", "pre-outro"}},
  };
  return rows;
}

const std::map<std::string, StructuralFunction, std::less<>>& lookup() {
  static const auto table = [] {
    std::map<std::string, StructuralFunction, std::less<>> m;
    for (const auto& [label, target] : mapping_table()) m.emplace(label.text(), target);
    return m;
  }();
  return table;
}

bool is_separator(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

}  // namespace

StructuralFunction function_from_code(int c) {
  if (c < 0 || c >= kNumClasses) throw InvalidArgument("class code out of range: " + std::to_string(c));
  return static_cast<StructuralFunction>(c);
}

std::string_view class_name(StructuralFunction f) noexcept { return kClassNames[code(f)]; }

std::optional<StructuralFunction> function_from_name(std::string_view name) {
  std::string lowered(name);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (int c = 0; c < kNumClasses; ++c) {
    if (kClassNames[c] == lowered) return static_cast<StructuralFunction>(c);
  }
  return std::nullopt;
}

const std::array<StructuralFunction, kNumClasses>& all_functions() noexcept {
  static constexpr std::array<StructuralFunction, kNumClasses> all = {
      StructuralFunction::kIntro, StructuralFunction::kVerse, StructuralFunction::kChorus,
      StructuralFunction::kBridge, StructuralFunction::kInst,  StructuralFunction::kOutro,
      StructuralFunction::kSilence};
  return all;
}

RawLabel normalize_label(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_sep = false;
  for (char c : raw) {
    if (is_separator(c)) {
      pending_sep = !out.empty();
      continue;
    }
    if (pending_sep) out.push_back('-');
    pending_sep = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (out.empty()) throw EmptyLabel();
  return RawLabel(std::move(out));
}

std::optional<StructuralFunction> try_map_label(const RawLabel& label) noexcept {
  const auto& m = lookup();
  if (auto it = m.find(label.text()); it != m.end()) return it->second;
  return std::nullopt;
}

StructuralFunction map_label(const RawLabel& label) {
  if (auto f = try_map_label(label)) return *f;
  throw UnknownLabel(label.text());
}

const std::vector<std::pair<RawLabel, StructuralFunction>>& mapping_table() {
  static const auto table = [] {
    std::vector<std::pair<RawLabel, StructuralFunction>> pairs;
    for (const auto& row : table_rows()) {
      for (auto label : row.labels) pairs.emplace_back(normalize_label(label), row.target);
    }
    return pairs;
  }();
  return table;
}

std::string mapping_table_tsv() {
  std::string out;
  for (const auto& [label, target] : mapping_table()) {
    out += label.text();
    out += '\t';
    out += class_name(target);
    out += '\n';
  }
  return out;
}

}  // namespace msa
