#include "htsrec/hierarchy.hpp"

#include <set>

#include "htsrec/errors.hpp"

namespace htsrec {

std::vector<std::string> Hierarchy::labels() const {
  std::vector<std::string> out = labels_upper;
  out.insert(out.end(), labels_bottom.begin(), labels_bottom.end());
  return out;
}

void Hierarchy::validate() const {
  const Eigen::Index nu = aggregation.rows();
  const Eigen::Index nb = aggregation.cols();
  if (nu < 1 || nb < 1)
    throw_validation("hierarchy: aggregation matrix must be non-empty");
  if (static_cast<Eigen::Index>(labels_upper.size()) != nu)
    throw_validation("hierarchy: " + std::to_string(labels_upper.size()) +
                     " upper labels for " + std::to_string(nu) +
                     " aggregation rows");
  if (static_cast<Eigen::Index>(labels_bottom.size()) != nb)
    throw_validation("hierarchy: " + std::to_string(labels_bottom.size()) +
                     " bottom labels for " + std::to_string(nb) +
                     " aggregation columns");
  for (Eigen::Index i = 0; i < nu; ++i) {
    bool any = false;
    for (Eigen::Index j = 0; j < nb; ++j) {
      const double v = aggregation(i, j);
      if (v != 0.0 && v != 1.0)
        throw_validation("hierarchy: aggregation row " + std::to_string(i) +
                         " ('" + labels_upper[i] + "') has non-binary entry " +
                         std::to_string(v) + " at column " + std::to_string(j));
      any = any || v == 1.0;
    }
    if (!any)
      throw_validation("hierarchy: aggregation row " + std::to_string(i) +
                       " ('" + labels_upper[i] + "') has no 1 entries");
  }
  std::set<std::string> seen;
  for (const auto& label : labels()) {
    if (!seen.insert(label).second)
      throw_validation("hierarchy: duplicate series label '" + label + "'");
  }
}

Hierarchy Hierarchy::minimal() {
  Hierarchy h;
  h.aggregation = Eigen::MatrixXd::Ones(1, 2);
  h.labels_upper = {"U"};
  h.labels_bottom = {"B1", "B2"};
  return h;
}

Eigen::MatrixXd summing_matrix(const Hierarchy& h) {
  const Eigen::Index nu = h.n_upper();
  const Eigen::Index nb = h.n_bottom();
  Eigen::MatrixXd s(nu + nb, nb);
  s.topRows(nu) = h.aggregation;
  s.bottomRows(nb) = Eigen::MatrixXd::Identity(nb, nb);
  return s;
}

Eigen::VectorXd coherence_residual(const Hierarchy& h, const Eigen::VectorXd& y) {
  if (y.size() != h.size())
    throw_validation("coherence_residual: vector has " + std::to_string(y.size()) +
                     " entries, hierarchy has " + std::to_string(h.size()));
  const Eigen::Index nu = h.n_upper();
  return y.head(nu) - h.aggregation * y.tail(h.n_bottom());
}

}  // namespace htsrec
