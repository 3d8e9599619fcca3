#include "srpanova/design.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "srpanova/error.hpp"

namespace srp {

const char* const kOrientationGrammar =
    "orientation grammar: f1_base=<level>,f2_base=<level>[,first=<factor-name>]";

std::string to_string(Family f) { return "M" + std::to_string(static_cast<int>(f)); }

Family parse_family(const std::string& s) {
  if (s.size() == 2 && s[0] == 'M' && s[1] >= '0' && s[1] <= '6') {
    return static_cast<Family>(s[1] - '0');
  }
  throw InputError("unknown model family '" + s + "' (valid: M0, M1, M2, M3, M4, M5, M6)");
}

std::string FactorDesign::group_name(int g) const {
  return level_names[0][level1_of(g)] + "/" + level_names[1][level2_of(g)];
}

int FactorDesign::level_index(int factor, const std::string& level) const {
  for (int l = 0; l < 2; ++l) {
    if (level_names[factor][l] == level) return l;
  }
  return -1;
}

int FactorDesign::factor_index(const std::string& name) const {
  for (int f = 0; f < 2; ++f) {
    if (factor_names[f] == name) return f;
  }
  return -1;
}

void FactorDesign::validate() const {
  if (factor_names[0].empty() || factor_names[1].empty() || factor_names[0] == factor_names[1]) {
    throw InputError("design needs two distinct, non-empty factor names");
  }
  for (int f = 0; f < 2; ++f) {
    const auto& l = level_names[f];
    if (l[0].empty() || l[1].empty() || l[0] == l[1]) {
      throw InputError("factor '" + factor_names[f] + "' needs two distinct, non-empty levels");
    }
    for (const auto& s : l) {
      if (s.find(',') != std::string::npos) {
        throw InputError("level name '" + s + "' contains a comma");
      }
    }
  }
}

Orientation normalize(Family family, Orientation o) {
  switch (family) {
    case Family::M0:
    case Family::M1:
      return {};
    case Family::M2:
    case Family::M5:
      return {0, o.base1, o.base2};
    case Family::M3:
      return {0, o.base1, 0};
    case Family::M4:
      return {0, 0, o.base2};
    case Family::M6:
      return o;
  }
  return o;
}

Orientation parse_orientation(const std::string& text, const FactorDesign& design) {
  Orientation o;
  if (text.empty()) return o;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(start, end - start);
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw InputError("invalid orientation item '" + item + "'; " + kOrientationGrammar);
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (!seen.insert(key).second) {
      throw InputError("orientation key '" + key + "' repeated; " + kOrientationGrammar);
    }
    if (key == "f1_base" || key == "f2_base") {
      const int f = key == "f1_base" ? 0 : 1;
      const int l = design.level_index(f, value);
      if (l < 0) {
        throw InputError("'" + value + "' is not a level of factor '" + design.factor_names[f] +
                         "' (levels: " + design.level_names[f][0] + ", " +
                         design.level_names[f][1] + "); " + kOrientationGrammar);
      }
      (f == 0 ? o.base1 : o.base2) = l;
    } else if (key == "first") {
      const int f = design.factor_index(value);
      if (f < 0) {
        throw InputError("'" + value + "' is not a factor name; " + kOrientationGrammar);
      }
      o.first = f;
    } else {
      throw InputError("unknown orientation key '" + key + "'; " + kOrientationGrammar);
    }
    start = end + 1;
  }
  return o;
}

std::string orientation_string(const Orientation& o, const FactorDesign& design) {
  return "f1_base=" + design.level_names[0][o.base1] + ",f2_base=" +
         design.level_names[1][o.base2] + ",first=" + design.factor_names[o.first];
}

void EffectIncidence::check() const {
  if (labels.size() != columns.size()) throw std::logic_error("incidence label/column mismatch");
  for (std::size_t k = 0; k < columns.size(); ++k) {
    int total = 0;
    for (int v : columns[k]) {
      if (v != 0 && v != 1) throw std::logic_error("non-binary loading in " + labels[k]);
      total += v;
    }
    if (total == 0) throw std::logic_error("effect " + labels[k] + " loads on no group");
    if (labels[k] == "phi11" && total != kGroups) {
      throw std::logic_error("phi11 must load on all groups");
    }
  }
}

EffectIncidence canonical_incidence(Family family, const Orientation& orientation) {
  const Orientation o = normalize(family, orientation);
  auto column = [](auto pred) {
    std::array<int, kGroups> c{};
    for (int g = 0; g < kGroups; ++g) {
      c[g] = pred(FactorDesign::level1_of(g), FactorDesign::level2_of(g)) ? 1 : 0;
    }
    return c;
  };
  EffectIncidence inc;
  auto add = [&](std::string label, std::array<int, kGroups> c) {
    inc.labels.push_back(std::move(label));
    inc.columns.push_back(c);
  };
  const auto all = column([](int, int) { return true; });
  const auto f1_off = column([&](int a, int) { return a != o.base1; });
  const auto f2_off = column([&](int, int b) { return b != o.base2; });

  switch (family) {
    case Family::M0:
      break;
    case Family::M1:
      for (int g = 0; g < kGroups; ++g) {
        std::array<int, kGroups> c{};
        c[g] = 1;
        add("phi_g" + std::to_string(g + 1), c);
      }
      break;
    case Family::M2:
      add("phi11", all);
      break;
    case Family::M3:
      add("phi11", all);
      add("phi21", f1_off);
      break;
    case Family::M4:
      add("phi11", all);
      add("phi12", f2_off);
      break;
    case Family::M5:
      add("phi11", all);
      add("phi21", f1_off);
      add("phi12", f2_off);
      break;
    case Family::M6: {
      // off-reference indicators of the model's first and second factor
      auto first_off = [&](int a, int b) { return o.first == 0 ? a != o.base1 : b != o.base2; };
      auto second_off = [&](int a, int b) { return o.first == 0 ? b != o.base2 : a != o.base1; };
      add("phi11", all);
      add("phi21", column(first_off));
      add("phi12", column([&](int a, int b) { return !first_off(a, b) && second_off(a, b); }));
      add("phi22", column([&](int a, int b) { return first_off(a, b) && second_off(a, b); }));
      break;
    }
  }
  inc.check();
  return inc;
}

std::string model_label(Family family, const Orientation& orientation,
                        const FactorDesign& design) {
  const Orientation o = normalize(family, orientation);
  const auto& b1 = design.level_names[0][o.base1];
  const auto& b2 = design.level_names[1][o.base2];
  const std::string head = to_string(family);
  switch (family) {
    case Family::M0:
    case Family::M1:
      return head;
    case Family::M2:
    case Family::M5:
      return head + ": " + b1 + " + " + b2;
    case Family::M3:
      return head + ": " + b1;
    case Family::M4:
      return head + ": " + b2;
    case Family::M6:
      return o.first == 0 ? head + ": " + b1 + " * " + b2 : head + ": " + b2 + " * " + b1;
  }
  return head;
}

ModelSpec make_spec(Family family, const Orientation& orientation, const FactorDesign& design) {
  ModelSpec s;
  s.family = family;
  s.orientation = normalize(family, orientation);
  s.incidence = canonical_incidence(family, s.orientation);
  s.label = model_label(family, s.orientation, design);
  return s;
}

int family_multiplicity(Family f) {
  static constexpr std::array<int, 7> counts{1, 1, 4, 2, 2, 4, 8};
  return counts[static_cast<int>(f)];
}

std::vector<ModelSpec> enumerate_ladder(const FactorDesign& design) {
  design.validate();
  std::vector<ModelSpec> out;
  for (int f = 0; f <= 6; ++f) {
    const auto family = static_cast<Family>(f);
    std::set<Orientation> seen;
    for (int first = 0; first < 2; ++first) {
      for (int b1 = 0; b1 < 2; ++b1) {
        for (int b2 = 0; b2 < 2; ++b2) {
          const auto o = normalize(family, Orientation{first, b1, b2});
          if (seen.insert(o).second) out.push_back(make_spec(family, o, design));
        }
      }
    }
  }
  return out;
}

std::vector<StructuralClass> dedup_structural(const std::vector<ModelSpec>& specs) {
  std::vector<std::multiset<std::array<int, kGroups>>> keys;
  std::vector<StructuralClass> classes;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& cols = specs[i].incidence.columns;
    std::multiset<std::array<int, kGroups>> key(cols.begin(), cols.end());
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(std::move(key));
      classes.push_back(StructuralClass{{i}});
    } else {
      classes[it - keys.begin()].members.push_back(i);
    }
  }
  return classes;
}

ModelSpec resolve_spec(const std::string& family, const std::string& orientation,
                       const FactorDesign& design) {
  const Family f = parse_family(family);
  return make_spec(f, parse_orientation(orientation, design), design);
}

}  // namespace srp
