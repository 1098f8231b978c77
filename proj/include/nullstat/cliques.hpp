/*
 * Copyright 2026 The nullstat Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "nullstat/independence.hpp"

namespace nullstat {

/// Sorted node indices.
using Clique = std::vector<std::size_t>;

namespace detail {

class NodeSet {
 public:
  explicit NodeSet(std::size_t n) : words_((n + 63) / 64, 0) {}

  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void reset(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
  bool empty() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }

  NodeSet operator&(const NodeSet& o) const {
    NodeSet r = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= o.words_[k];
    return r;
  }
  NodeSet operator|(const NodeSet& o) const {
    NodeSet r = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] |= o.words_[k];
    return r;
  }
  NodeSet minus(const NodeSet& o) const {
    NodeSet r = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= ~o.words_[k];
    return r;
  }
  std::size_t count_and(const NodeSet& o) const {
    std::size_t c = 0;
    for (std::size_t k = 0; k < words_.size(); ++k) c += std::popcount(words_[k] & o.words_[k]);
    return c;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      std::uint64_t w = words_[k];
      while (w) {
        fn(k * 64 + static_cast<std::size_t>(std::countr_zero(w)));
        w &= w - 1;
      }
    }
  }

 private:
  std::vector<std::uint64_t> words_;
};

class BronKerbosch {
 public:
  explicit BronKerbosch(const IndependenceGraph& g) : n_(g.size()) {
    neighbors_.assign(n_, NodeSet(n_));
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (g.adjacent(i, j)) neighbors_[i].set(j);
      }
    }
  }

  std::vector<Clique> run() {
    NodeSet p(n_);
    for (std::size_t i = 0; i < n_; ++i) p.set(i);
    Clique r;
    if (n_ > 0) expand(r, p, NodeSet(n_));
    return std::move(out_);
  }

 private:
  // Tomita pivoting: pivot u in P u X maximizing |P & N(u)|.
  void expand(Clique& r, NodeSet p, NodeSet x) {
    if (p.empty()) {
      if (x.empty()) {
        Clique c = r;
        std::sort(c.begin(), c.end());
        out_.push_back(std::move(c));
      }
      return;
    }
    std::size_t pivot = 0, best = 0;
    bool have_pivot = false;
    (p | x).for_each([&](std::size_t u) {
      const std::size_t c = p.count_and(neighbors_[u]);
      if (!have_pivot || c > best) {
        pivot = u;
        best = c;
        have_pivot = true;
      }
    });
    const NodeSet candidates = p.minus(neighbors_[pivot]);
    candidates.for_each([&](std::size_t v) {
      r.push_back(v);
      expand(r, p & neighbors_[v], x & neighbors_[v]);
      r.pop_back();
      p.reset(v);
      x.set(v);
    });
  }

  std::size_t n_;
  std::vector<NodeSet> neighbors_;
  std::vector<Clique> out_;
};

}  // namespace detail

/// Every maximal clique of g (Bron-Kerbosch with pivoting), each sorted, the
/// list ordered lexicographically.
inline std::vector<Clique> enumerate_maximal_cliques(const IndependenceGraph& g) {
  auto cliques = detail::BronKerbosch(g).run();
  std::sort(cliques.begin(), cliques.end());
  return cliques;
}

}  // namespace nullstat
