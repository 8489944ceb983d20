#pragma once

// A-ary, L-layer tree of sub-codebooks built by recursive partition-and-train
// over a common training set, plus the layered online search costing A*L
// candidate evaluations per user.

#include <cstdint>
#include <string>
#include <vector>

#include "pixsim/codebook.hpp"
#include "pixsim/types.hpp"

namespace pixsim {

struct HierarchicalCodebook {
  int q = 0;
  int branching = 0;    // A
  int layer_count = 0;  // L
  // layers[l-1] holds layer l's A^l codewords; sub-codebook i (1-based)
  // occupies positions [(i-1)*A, i*A).
  std::vector<std::vector<AntennaCoder>> layers;

  // child sub-codebook (1-based, in layer l+1) of codeword a in sub-codebook i of layer l
  static int child_index(int branching, int i, int a) { return branching * (i - 1) + a; }

  const AntennaCoder& codeword(int layer, int sub, int a) const {
    return layers[static_cast<std::size_t>(layer - 1)][static_cast<std::size_t>((sub - 1) * branching + (a - 1))];
  }
};

HierarchicalCodebook load_hierarchy(const std::string& path);
void save_hierarchy(const std::string& path, const HierarchicalCodebook& hc);

struct HierarchyBuildDiagnostics {
  int empty_children = 0;              // sub-codebooks copied from their parent codeword
  std::vector<std::vector<int>> partition_sizes;  // per layer, per sub-codebook training-set size
};

HierarchicalCodebook build_hierarchy(const TrainingSet& ts, int branching, int layer_count, double rho_bar,
                                     const SeboConfig& sebo_cfg, std::uint64_t seed, const PortModel& model,
                                     const PatternBasis& basis, HierarchyBuildDiagnostics* diag = nullptr);

SearchResult hierarchical_search_optimize(const std::vector<ReducedChannel>& channels, const HierarchicalCodebook& hc,
                                          const PortModel& model, const PatternBasis& basis, const SearchConfig& cfg);

}  // namespace pixsim
