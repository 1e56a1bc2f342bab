#pragma once

#include <json.hpp>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "foil/formula.hpp"
#include "foil/model.hpp"

namespace foil {

enum class FType { Real, Bool };

struct Schema {
  struct Feature {
    std::string name;
    FType type;
  };
  std::vector<Feature> features;
  std::vector<std::string> classes{"neg", "pos"};

  int index(std::string_view name) const;  // -1 when unknown
};

Schema schema_from_json(const nlohmann::json& j);
nlohmann::json schema_to_json(const Schema& s);
Schema load_schema(const std::string& path);

// Real-valued decision tree. A threshold node (feat, tau) sends values ≤ tau
// to hi and the rest to lo; a Boolean node sends 0 to lo and 1 to hi.
struct RNode {
  int feat = -1;
  double tau = 0;
  int lo = -1, hi = -1;
  bool leaf = false;
  bool value = false;
};

struct RealTree {
  std::vector<RNode> nodes;
  int root = 0;

  int leaf(bool v);
  int split(int feat, double tau, int lo, int hi);
  int test(int feat, int lo, int hi);
};

// Throws Error unless every label fits the schema, thresholds narrow along
// each path and no Boolean feature repeats on a path.
void check_compatible(const RealTree& t, const Schema& s);
bool classify(const RealTree& t, const Schema& s, const std::vector<double>& values);

// Nodes reference features by schema index ("var") or by name ("feature").
RealTree real_tree_from_json(const nlohmann::json& j, const Schema& s);
nlohmann::json real_tree_to_json(const RealTree& t, const Schema& s);

enum class HOp { Pos, Neg, Full, Le, Eq, Not, And, Or, Exists, Forall, True, False };

struct HNode;
using H = std::shared_ptr<const HNode>;

struct HNode {
  HOp op;
  std::string var;
  int feat = -1;
  double tau = 0;
  bool strict = false;  // Le: `<` instead of `<=`
  bool b = false;       // Eq: compared value
  H l, r;

  // The threshold the atom actually tests: x < τ is x ≤ the double below τ.
  double cut() const;
};

H parse_hl(std::string_view text, const Schema& s);
std::string to_string(const H& f, const Schema& s);

struct PartitionMap {
  std::vector<std::vector<double>> P;  // sorted thresholds, real features only
  std::vector<int> offset, width;      // binary slot range per schema feature
  int dim = 0;

  // 0-based interval of v: i when P[i-1] < v ≤ P[i], |P| for the last one.
  int interval_of(int f, double v) const;
  int rank(int f, double tau) const;  // 1-based position of tau in P[f], 0 if absent
};

PartitionMap partition_sets(const RealTree& t, const H& f, const Schema& s);

// Quantifiers are guarded so that they only range over encodings of HL
// instances: per real feature either the first slot is ⊥ (undefined value) or
// the range is a canonical interval code.
F compile_hl_query(const H& f, const PartitionMap& pm, const Schema& s);
Diagram binarize_tree(const RealTree& t, const PartitionMap& pm, const Schema& s);

// Binary encoding of an HL instance; values index intervals (real) or hold
// 0/1 (Boolean), -1 for undefined.
Inst encode(const std::vector<int>& values, const PartitionMap& pm, const Schema& s);

struct HLResult {
  bool value = false;
  PartitionMap pm;
  F query;
  Diagram model;
  std::string engine;  // "exists" or "naive"
};

HLResult hl_eval(const RealTree& t, const H& f, const Schema& s, long long naive_cap = 10'000'000);

}  // namespace foil
