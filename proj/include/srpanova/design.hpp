#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <string>
#include <vector>

namespace srp {

/// Number of groups in a 2x2 design.
inline constexpr int kGroups = 4;

enum class Family { M0 = 0, M1, M2, M3, M4, M5, M6 };

std::string to_string(Family f);
Family parse_family(const std::string& s);

/**
 * Two factors with two levels each. Group g (0-based) has factor levels
 * (g / 2, g % 2): g1=(1,1), g2=(1,2), g3=(2,1), g4=(2,2) in 1-based terms.
 */
struct FactorDesign {
  std::array<std::string, 2> factor_names{"factor1", "factor2"};
  std::array<std::array<std::string, 2>, 2> level_names{{{"a1", "a2"}, {"b1", "b2"}}};

  static constexpr int group_of(int level1, int level2) { return 2 * level1 + level2; }
  static constexpr int level1_of(int g) { return g / 2; }
  static constexpr int level2_of(int g) { return g % 2; }

  /// "level1/level2", used as the group column in output tables.
  std::string group_name(int g) const;
  int level_index(int factor, const std::string& level) const;
  int factor_index(const std::string& name) const;

  /// Throws InputError on empty or duplicate names.
  void validate() const;
};

/**
 * Which level of each design factor is the reference, and which factor is
 * treated as the first one (only matters for M6).
 */
struct Orientation {
  int first = 0;  ///< design factor used as the model's first factor
  int base1 = 0;  ///< reference level of design factor 1
  int base2 = 0;  ///< reference level of design factor 2

  auto operator<=>(const Orientation&) const = default;
};

/// Resets the orientation components that do not affect `family` to 0.
Orientation normalize(Family family, Orientation o);

/**
 * Parses `f1_base=<level>,f2_base=<level>[,first=<factor-name>]`. Missing keys
 * default to the first level / first factor. Throws InputError with the
 * grammar on anything else.
 */
Orientation parse_orientation(const std::string& text, const FactorDesign& design);
std::string orientation_string(const Orientation& o, const FactorDesign& design);
extern const char* const kOrientationGrammar;

/// Binary map of structured effects onto group predictors (loading fixed at 1).
struct EffectIncidence {
  std::vector<std::string> labels;
  std::vector<std::array<int, kGroups>> columns;

  std::size_t n_effects() const { return columns.size(); }
  bool loads(int group, std::size_t effect) const { return columns.at(effect)[group] != 0; }
  /// Throws std::logic_error when an incidence invariant fails.
  void check() const;
};

struct ModelSpec {
  Family family = Family::M0;
  Orientation orientation;
  EffectIncidence incidence;
  std::string label;
};

/**
 * Incidence for one family and orientation. Effects, relative to the
 * orientation's reference levels:
 *   M0 none; M1 one individual field per group; M2 phi11 on all groups;
 *   M3 adds phi21 on factor-1 non-reference groups; M4 adds phi12 on factor-2
 *   non-reference groups; M5 adds both; M6 adds phi21 on first-factor
 *   non-reference, phi12 on (first reference, second non-reference) and phi22
 *   on (first non-reference, second non-reference).
 */
EffectIncidence canonical_incidence(Family family, const Orientation& orientation);

std::string model_label(Family family, const Orientation& orientation, const FactorDesign& design);

ModelSpec make_spec(Family family, const Orientation& orientation, const FactorDesign& design);

/// Number of ladder entries per family (1, 1, 4, 2, 2, 4, 8).
int family_multiplicity(Family f);

/// All 22 specs ordered by family, then orientation (first, base1, base2).
std::vector<ModelSpec> enumerate_ladder(const FactorDesign& design);

/// Specs whose incidence columns coincide as sets; `members` index into the input.
struct StructuralClass {
  std::vector<std::size_t> members;
  std::size_t representative() const { return members.front(); }
};

std::vector<StructuralClass> dedup_structural(const std::vector<ModelSpec>& specs);

/// Finds a spec by family and orientation text (empty text = defaults).
ModelSpec resolve_spec(const std::string& family, const std::string& orientation,
                       const FactorDesign& design);

}  // namespace srp
