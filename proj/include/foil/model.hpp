#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "foil/instance.hpp"

namespace foil {

enum class Kind { DT, FBDD, OBDD, COBDD, COTDD };

// Internal nodes carry var (0-indexed feature) and children; leaves carry value.
// lo follows the 0-edge, hi the 1-edge, bot the ⊥-edge (COTDD only).
struct Node {
  int var = -1;
  int lo = -1, hi = -1, bot = -1;
  bool leaf = false;
  bool value = false;
};

struct Diagram {
  Kind kind = Kind::FBDD;
  int dim = 0;
  std::vector<int> order;  // permutation of 0..dim-1, empty when unordered
  int root = 0;
  std::vector<Node> nodes;

  int leaf(bool v);  // appends a leaf, returns its index
  int inner(int var, int lo, int hi, int bot = -1);
};

struct Perceptron {
  std::vector<double> w;
  double t = 0;
  std::vector<int> prot;
};

using Model = std::variant<Diagram, Perceptron>;

struct ModelFile {
  Model model;
  std::vector<std::string> features;
  std::vector<std::string> classes;
};

int dim(const Model& m);
const char* kind_name(Kind k);
bool is_binary_diagram(const Diagram& d);

// Root-to-leaf evaluation. Binary models require a full instance.
bool classify(const Diagram& d, const Inst& e);
bool classify(const Perceptron& p, const Inst& e);
bool classify(const Model& m, const Inst& e);

// The Pos predicate: false on partial instances of binary models.
bool pos(const Model& m, const Inst& e);

struct Report {
  bool is_free = false;
  bool is_ordered = false;
  bool is_complete = false;
  bool is_tree = false;
  int width = 0;
  std::vector<int> per_label;
};

Report validate(const Diagram& d);

// Per-component value sets for completion search: bit0 allows 0, bit1 allows 1.
using Dom = std::vector<uint8_t>;
constexpr uint8_t kAllow0 = 1, kAllow1 = 2;
Dom dom_of(const Inst& e);  // defined → that value, ⊥/◇ → both

// Finds a full instance in the box dom classified as target. Works on any
// binary diagram: free ones are memoized on nodes, others track path
// assignments. Components off the found path take their smallest allowed
// value (0 when allowed).
class CompletionSearch {
 public:
  explicit CompletionSearch(const Model& m);
  std::optional<Inst> find(const Dom& dom, bool target) const;
  bool model_free() const { return free_; }

 private:
  Model m_;
  bool free_ = true;
  std::vector<std::vector<int>> below_;  // vars tested strictly inside each node's subgraph
};

std::optional<Inst> positive_completion(const Diagram& d, const Inst& e);

// JSON model format (0-indexed features).
ModelFile model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelFile& mf);
nlohmann::json model_to_json(const Model& m);
ModelFile load_model_file(const std::string& path);

Diagram constant_diagram(int dim, bool v, Kind k = Kind::FBDD);

}  // namespace foil
