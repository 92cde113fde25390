#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "dsas/sdp.hpp"

namespace dsas {

// Sparse SDPA ".dat-s": the standard form is
//   minimize c^T y   s.t.   sum_j y_j F_j - F_0 >= 0  (per block),
// so our constant term maps to F_0 = -f0. Only upper-triangle entries are
// written. Output is canonical (merged, zero-free, sorted), which makes
// export(import(export(p))) byte-identical.

std::string export_sdpa(const SdpProblem& problem) {
  problem.validate();
  const int nblocks = static_cast<int>(problem.blocks.size());
  using Key = std::tuple<int, int, int, int>;  // matno, blkno, i, j
  std::vector<std::pair<Key, double>> entries;

  for (int b = 0; b < nblocks; ++b) {
    const auto& blk = problem.blocks[b];
    for (int i = 0; i < blk.dim; ++i)
      for (int j = i; j < blk.dim; ++j)
        if (blk.f0(i, j) != 0.0)
          entries.push_back({{0, b + 1, i + 1, j + 1}, -blk.f0(i, j)});
    for (const auto& [var, f] : blk.terms)
      for (int i = 0; i < blk.dim; ++i)
        for (int j = i; j < blk.dim; ++j)
          if (f(i, j) != 0.0)
            entries.push_back({{var + 1, b + 1, i + 1, j + 1}, f(i, j)});
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  // Merge duplicates (a variable listed twice in one block), drop zeros.
  std::vector<std::pair<Key, double>> merged;
  for (const auto& e : entries) {
    if (!merged.empty() && merged.back().first == e.first)
      merged.back().second += e.second;
    else
      merged.push_back(e);
  }

  std::ostringstream out;
  out << problem.num_vars << "\n";
  out << nblocks << "\n";
  for (int b = 0; b < nblocks; ++b)
    out << problem.blocks[b].dim << (b + 1 < nblocks ? " " : "\n");
  if (nblocks == 0) out << "\n";
  for (int j = 0; j < problem.num_vars; ++j) {
    const double cj = problem.objective.size() ? problem.objective(j) : 0.0;
    out << format_double(cj) << (j + 1 < problem.num_vars ? " " : "\n");
  }
  for (const auto& [key, value] : merged) {
    if (value == 0.0) continue;
    const auto [matno, blkno, i, j] = key;
    out << matno << " " << blkno << " " << i << " " << j << " "
        << format_double(value) << "\n";
  }
  return out.str();
}

SdpProblem import_sdpa(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_data_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '*' || line[0] == '"') continue;  // comment lines
      return line;
    }
    throw std::runtime_error("sdpa: truncated input");
  };

  SdpProblem p;
  p.num_vars = std::stoi(next_data_line());
  const int nblocks = std::stoi(next_data_line());
  {
    std::istringstream bs(next_data_line());
    for (int b = 0; b < nblocks; ++b) {
      int dim = 0;
      bs >> dim;
      if (!bs) throw std::runtime_error("sdpa: bad block size line");
      LmiBlock blk;
      blk.dim = std::abs(dim);  // negative marks a diagonal block; treat dense
      blk.name = "block" + std::to_string(b + 1);
      blk.f0 = Eigen::MatrixXd::Zero(blk.dim, blk.dim);
      p.blocks.push_back(std::move(blk));
    }
  }
  {
    std::istringstream cs(next_data_line());
    p.objective.resize(p.num_vars);
    for (int j = 0; j < p.num_vars; ++j) {
      cs >> p.objective(j);
      if (!cs) throw std::runtime_error("sdpa: bad objective line");
    }
  }
  if (p.objective.size() && p.objective.cwiseAbs().maxCoeff() == 0.0)
    p.objective.resize(0);

  // One coefficient matrix per (matno, block); accumulate entries.
  std::vector<std::vector<Eigen::MatrixXd>> coeff(
      p.num_vars, std::vector<Eigen::MatrixXd>());
  std::vector<std::vector<bool>> used(p.num_vars,
                                      std::vector<bool>(nblocks, false));
  for (auto& c : coeff)
    for (int b = 0; b < nblocks; ++b)
      c.push_back(Eigen::MatrixXd::Zero(p.blocks[b].dim, p.blocks[b].dim));

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*' || line[0] == '"') continue;
    std::istringstream es(line);
    int matno, blkno, i, j;
    double value;
    es >> matno >> blkno >> i >> j >> value;
    if (!es) throw std::runtime_error("sdpa: bad entry line: " + line);
    if (blkno < 1 || blkno > nblocks || matno < 0 || matno > p.num_vars)
      throw std::runtime_error("sdpa: entry index out of range: " + line);
    auto place = [&](Eigen::MatrixXd& m) {
      m(i - 1, j - 1) = value;
      m(j - 1, i - 1) = value;
    };
    if (matno == 0) {
      place(p.blocks[blkno - 1].f0);
    } else {
      place(coeff[matno - 1][blkno - 1]);
      used[matno - 1][blkno - 1] = true;
    }
  }
  for (auto& b : p.blocks) b.f0 = -b.f0;
  for (int j = 0; j < p.num_vars; ++j)
    for (int b = 0; b < nblocks; ++b)
      if (used[j][b]) p.blocks[b].terms.emplace_back(j, coeff[j][b]);
  for (int j = 0; j < p.num_vars; ++j)
    p.var_names.push_back("y" + std::to_string(j + 1));
  return p;
}

}  // namespace dsas
