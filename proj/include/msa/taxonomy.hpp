#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace msa {

/// The 7-class structural-function vocabulary. Integer codes are a file-format contract.
enum class StructuralFunction : std::uint8_t {
  kIntro = 0,
  kVerse = 1,
  kChorus = 2,
  kBridge = 3,
  kInst = 4,
  kOutro = 5,
  kSilence = 6,
};

inline constexpr int kNumClasses = 7;

constexpr int code(StructuralFunction f) noexcept { return static_cast<int>(f); }

/// Throws InvalidArgument for codes outside 0..6.
StructuralFunction function_from_code(int code);

std::string_view class_name(StructuralFunction f) noexcept;

/// Case-insensitive lookup of one of the 7 class names.
std::optional<StructuralFunction> function_from_name(std::string_view name);

const std::array<StructuralFunction, kNumClasses>& all_functions() noexcept;

/// A section label in canonical form: trimmed, lowercase, runs of whitespace,
/// underscores and hyphens collapsed into single hyphens.
class RawLabel {
 public:
  const std::string& text() const noexcept { return text_; }
  friend bool operator==(const RawLabel&, const RawLabel&) = default;
  friend auto operator<=>(const RawLabel&, const RawLabel&) = default;

 private:
  explicit RawLabel(std::string text) : text_(std::move(text)) {}
  std::string text_;

  friend RawLabel normalize_label(std::string_view raw);
};

/// Throws EmptyLabel if nothing remains after trimming.
RawLabel normalize_label(std::string_view raw);

/// Exact-match lookup in the HookTheory mapping table. Throws UnknownLabel.
StructuralFunction map_label(const RawLabel& label);

/// Non-throwing variant of map_label.
std::optional<StructuralFunction> try_map_label(const RawLabel& label) noexcept;

/// All 22 (label, class) pairs, grouped by class row and in table order within a row.
const std::vector<std::pair<RawLabel, StructuralFunction>>& mapping_table();

/// The mapping table rendered as `label TAB class` lines, as shipped in data/taxonomy.tsv.
std::string mapping_table_tsv();

}  // namespace msa
