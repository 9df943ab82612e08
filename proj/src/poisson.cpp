#include "poissonkit/poisson.hpp"

#include "poissonkit/errors.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace poissonkit {

namespace {

void check_length(const PoissonStructure& w, const Eigen::VectorXd& z) {
  if (static_cast<std::size_t>(z.size()) != w.dimension())
    throw ArgumentError("point has length " + std::to_string(z.size()) + ", chart dimension is " +
                        std::to_string(w.dimension()));
}

void check_arity(const PoissonStructure& w, const Expression& f) {
  if (f.arity() != w.dimension())
    throw ArgumentError("expression arity " + std::to_string(f.arity()) +
                        " does not match chart dimension " + std::to_string(w.dimension()));
}

// Exact antisymmetry from the strict upper triangle's average.
void antisymmetrize(Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = 0.5 * (m(i, j) - m(j, i));
      m(i, j) = v;
      m(j, i) = -v;
    }
  }
}

Eigen::MatrixXd lie_poisson_matrix(const StructureConstants& c, const Eigen::VectorXd& z) {
  const std::size_t k = c.dimension();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t m = 0; m < k; ++m) {
    for (std::size_t n = m + 1; n < k; ++n) {
      double s = 0.0;
      for (std::size_t h = 0; h < k; ++h) s += c(h, m, n) * z[static_cast<Eigen::Index>(h)];
      w(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = s;
      w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) = -s;
    }
  }
  return w;
}

Eigen::MatrixXd canonical_matrix(const CanonicalVariant& c, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < c.pairs; ++i) {
    const auto q = static_cast<Eigen::Index>(c.slot_to_coordinate[i]);
    const auto p = static_cast<Eigen::Index>(c.slot_to_coordinate[c.pairs + i]);
    w(p, q) = 1.0;  // {p_i, q^i} = +1
    w(q, p) = -1.0;
  }
  return w;
}

// Omega and, optionally, its partials; throws when the form is singular.
Eigen::MatrixXd inverted_form(const AntisymmetricField& form, const Eigen::VectorXd& z,
                              std::vector<Eigen::MatrixXd>* partials) {
  std::vector<Eigen::MatrixXd> dform;
  const Eigen::MatrixXd omega = partials ? form.matrix(z, dform) : form.matrix(z);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(omega);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0 || s(s.size() - 1) < 1e-13 * s(0))
    throw SingularFormError("symplectic form is not invertible at the queried point");
  const Eigen::MatrixXd inv = omega.partialPivLu().inverse();
  Eigen::MatrixXd w = -inv;
  antisymmetrize(w);
  if (partials) {
    // d(-A^{-1}) = A^{-1} (dA) A^{-1}
    partials->clear();
    for (const auto& d : dform) {
      Eigen::MatrixXd p = inv * d * inv;
      antisymmetrize(p);
      partials->push_back(std::move(p));
    }
  }
  return w;
}

std::vector<Eigen::MatrixXd> zero_partials(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return std::vector<Eigen::MatrixXd>(dim, Eigen::MatrixXd::Zero(n, n));
}

}  // namespace

// ------------------------------------------------------------------- Chart

Chart::Chart(std::vector<std::string> names, std::vector<Interval> box,
             std::optional<Predicate> guard)
    : names_(std::move(names)), box_(std::move(box)), guard_(std::move(guard)) {
  check_coordinate_names(names_);
  if (names_.empty()) throw ArgumentError("chart must have positive dimension");
  if (box_.size() != names_.size()) throw ArgumentError("box needs one interval per coordinate");
  for (const auto& iv : box_)
    if (!(iv.hi > iv.lo)) throw ArgumentError("sampling box must have positive volume");
  if (guard_ && guard_->arity() != names_.size())
    throw ArgumentError("guard arity does not match chart dimension");
}

Chart Chart::uniform(std::vector<std::string> names, double lo, double hi) {
  std::vector<Interval> box(names.size(), Interval{lo, hi});
  return Chart(std::move(names), std::move(box));
}

Chart Chart::with_guard(std::optional<Predicate> guard) const {
  return Chart(names_, box_, std::move(guard));
}

std::size_t Chart::index_of(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw UnknownIdentifier(name);
  return static_cast<std::size_t>(it - names_.begin());
}

bool Chart::in_box(const Eigen::VectorXd& z) const {
  if (static_cast<std::size_t>(z.size()) != dimension()) return false;
  for (std::size_t i = 0; i < dimension(); ++i) {
    const double v = z[static_cast<Eigen::Index>(i)];
    if (v < box_[i].lo || v > box_[i].hi) return false;
  }
  return true;
}

bool Chart::admits(const Eigen::VectorXd& z) const { return in_box(z) && satisfies(guard_, z); }

// ------------------------------------------------------ AntisymmetricField

AntisymmetricField::AntisymmetricField(std::size_t dimension, std::vector<Entry> entries)
    : dim_(dimension), entries_(std::move(entries)) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : entries_) {
    if (e.row >= e.col || e.col >= dim_)
      throw ArgumentError("upper entries need row < col < dimension");
    if (e.value.arity() != dim_) throw ArgumentError("entry arity does not match dimension");
    if (!seen.insert({e.row, e.col}).second) throw ArgumentError("duplicate upper entry");
  }
}

Eigen::MatrixXd AntisymmetricField::matrix(const Eigen::VectorXd& z) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : entries_) {
    const double v = eval(e.value, z);
    m(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = v;
    m(static_cast<Eigen::Index>(e.col), static_cast<Eigen::Index>(e.row)) = -v;
  }
  return m;
}

Eigen::MatrixXd AntisymmetricField::matrix(const Eigen::VectorXd& z,
                                           std::vector<Eigen::MatrixXd>& partials) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  partials = zero_partials(dim_);
  for (const auto& e : entries_) {
    const auto r = static_cast<Eigen::Index>(e.row), c = static_cast<Eigen::Index>(e.col);
    if (e.value.is_constant()) {
      const double v = eval(e.value, z);
      m(r, c) = v;
      m(c, r) = -v;
      continue;
    }
    const Jet1 j = eval_jet1(e.value, z);
    m(r, c) = j.value;
    m(c, r) = -j.value;
    for (Eigen::Index rho = 0; rho < n; ++rho) {
      partials[static_cast<std::size_t>(rho)](r, c) = j.gradient[rho];
      partials[static_cast<std::size_t>(rho)](c, r) = -j.gradient[rho];
    }
  }
  return m;
}

// -------------------------------------------------------- PoissonStructure

PoissonStructure PoissonStructure::canonical(Chart chart, std::size_t pairs, std::size_t extra,
                                             std::vector<std::size_t> slot_to_coordinate) {
  const std::size_t dim = 2 * pairs + extra;
  if (dim != chart.dimension())
    throw ArgumentError("canonical structure needs 2*pairs + extra = chart dimension");
  if (slot_to_coordinate.empty()) {
    slot_to_coordinate.resize(dim);
    std::iota(slot_to_coordinate.begin(), slot_to_coordinate.end(), std::size_t{0});
  }
  std::vector<std::size_t> sorted = slot_to_coordinate;
  std::sort(sorted.begin(), sorted.end());
  bool permutation = sorted.size() == dim;
  for (std::size_t i = 0; permutation && i < dim; ++i) permutation = sorted[i] == i;
  if (!permutation)
    throw ArgumentError("canonical slot order must be a permutation of the chart indices");
  return {std::move(chart), CanonicalVariant{pairs, extra, std::move(slot_to_coordinate)}};
}

PoissonStructure PoissonStructure::matrix(Chart chart, std::vector<AntisymmetricField::Entry> upper) {
  AntisymmetricField f(chart.dimension(), std::move(upper));
  return {std::move(chart), MatrixVariant{std::move(f)}};
}

PoissonStructure PoissonStructure::zero(Chart chart) { return matrix(std::move(chart), {}); }

PoissonStructure PoissonStructure::lie_poisson(Chart chart, StructureConstants c) {
  if (c.dimension() != chart.dimension())
    throw ArgumentError("Lie-Poisson chart dimension must equal the algebra dimension");
  return {std::move(chart), LiePoissonVariant{std::move(c)}};
}

PoissonStructure PoissonStructure::symplectic_inverse(Chart chart,
                                                      std::vector<AntisymmetricField::Entry> form_upper) {
  if (chart.dimension() % 2 != 0) throw ArgumentError("a symplectic chart must be even-dimensional");
  AntisymmetricField f(chart.dimension(), std::move(form_upper));
  return {std::move(chart), SymplecticInverseVariant{std::move(f)}};
}

PoissonStructure PoissonStructure::with_chart(Chart chart) const {
  if (chart.dimension() != dimension()) throw ArgumentError("replacement chart has wrong dimension");
  return {std::move(chart), variant_};
}

const char* PoissonStructure::variant_name() const {
  return std::visit(
      [](const auto& v) -> const char* {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, CanonicalVariant>) return "canonical";
        else if constexpr (std::is_same_v<T, MatrixVariant>) return "matrix";
        else if constexpr (std::is_same_v<T, LiePoissonVariant>) return "lie_poisson";
        else if constexpr (std::is_same_v<T, SymplecticInverseVariant>) return "symplectic_inverse";
        else return "product";
      },
      variant_);
}

// -------------------------------------------------------------- operations

Eigen::MatrixXd bivector_matrix(const PoissonStructure& w, const Eigen::VectorXd& z) {
  check_length(w, z);
  return std::visit(
      [&](const auto& v) -> Eigen::MatrixXd {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, CanonicalVariant>) {
          return canonical_matrix(v, w.dimension());
        } else if constexpr (std::is_same_v<T, MatrixVariant>) {
          return v.entries.matrix(z);
        } else if constexpr (std::is_same_v<T, LiePoissonVariant>) {
          return lie_poisson_matrix(v.constants, z);
        } else if constexpr (std::is_same_v<T, SymplecticInverseVariant>) {
          return inverted_form(v.form, z, nullptr);
        } else {
          const auto d1 = static_cast<Eigen::Index>(v.first->dimension());
          const auto d2 = static_cast<Eigen::Index>(v.second->dimension());
          Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d1 + d2, d1 + d2);
          m.topLeftCorner(d1, d1) = bivector_matrix(*v.first, z.head(d1));
          m.bottomRightCorner(d2, d2) = bivector_matrix(*v.second, z.tail(d2));
          return m;
        }
      },
      w.variant());
}

BivectorAt bivector_at(const PoissonStructure& w, const Eigen::VectorXd& z) {
  check_length(w, z);
  BivectorAt out;
  out.point = z;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, CanonicalVariant>) {
          out.matrix = canonical_matrix(v, w.dimension());
          out.partials = zero_partials(w.dimension());
        } else if constexpr (std::is_same_v<T, MatrixVariant>) {
          out.matrix = v.entries.matrix(z, out.partials);
        } else if constexpr (std::is_same_v<T, LiePoissonVariant>) {
          const auto& c = v.constants;
          const std::size_t k = c.dimension();
          out.matrix = lie_poisson_matrix(c, z);
          out.partials = zero_partials(k);
          for (std::size_t rho = 0; rho < k; ++rho)
            for (std::size_t m = 0; m < k; ++m)
              for (std::size_t n = m + 1; n < k; ++n) {
                out.partials[rho](static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = c(rho, m, n);
                out.partials[rho](static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) = -c(rho, m, n);
              }
        } else if constexpr (std::is_same_v<T, SymplecticInverseVariant>) {
          out.matrix = inverted_form(v.form, z, &out.partials);
        } else {
          const std::size_t d1 = v.first->dimension(), d2 = v.second->dimension();
          const auto e1 = static_cast<Eigen::Index>(d1), e2 = static_cast<Eigen::Index>(d2);
          const BivectorAt b1 = bivector_at(*v.first, z.head(e1));
          const BivectorAt b2 = bivector_at(*v.second, z.tail(e2));
          out.matrix = Eigen::MatrixXd::Zero(e1 + e2, e1 + e2);
          out.matrix.topLeftCorner(e1, e1) = b1.matrix;
          out.matrix.bottomRightCorner(e2, e2) = b2.matrix;
          out.partials = zero_partials(d1 + d2);
          for (std::size_t r = 0; r < d1; ++r) out.partials[r].topLeftCorner(e1, e1) = b1.partials[r];
          for (std::size_t r = 0; r < d2; ++r)
            out.partials[d1 + r].bottomRightCorner(e2, e2) = b2.partials[r];
        }
      },
      w.variant());
  return out;
}

double bracket(const PoissonStructure& w, const Expression& f, const Expression& g,
               const Eigen::VectorXd& z) {
  check_arity(w, f);
  check_arity(w, g);
  const Eigen::MatrixXd m = bivector_matrix(w, z);
  const Jet1 jf = eval_jet1(f, z);
  const Jet1 jg = eval_jet1(g, z);
  return jf.gradient.dot(m * jg.gradient);
}

Eigen::VectorXd bracket_gradient(const PoissonStructure& w, const Expression& f,
                                 const Expression& g, const Eigen::VectorXd& z) {
  check_arity(w, f);
  check_arity(w, g);
  const BivectorAt b = bivector_at(w, z);
  const Jet2 jf = eval_jet2(f, z);
  const Jet2 jg = eval_jet2(g, z);
  Eigen::VectorXd grad = jf.hessian * (b.matrix * jg.gradient) +
                         jg.hessian * (b.matrix.transpose() * jf.gradient);
  for (std::size_t rho = 0; rho < b.partials.size(); ++rho)
    grad[static_cast<Eigen::Index>(rho)] += jf.gradient.dot(b.partials[rho] * jg.gradient);
  return grad;
}

Eigen::VectorXd hamiltonian_field(const PoissonStructure& w, const Expression& f,
                                  const Eigen::VectorXd& z) {
  check_arity(w, f);
  const Eigen::MatrixXd m = bivector_matrix(w, z);
  return m.transpose() * eval_jet1(f, z).gradient;
}

Eigen::VectorXd sharp(const PoissonStructure& w, const Eigen::VectorXd& covector,
                      const Eigen::VectorXd& z) {
  if (covector.size() != static_cast<Eigen::Index>(w.dimension()))
    throw ArgumentError("covector length does not match chart dimension");
  return bivector_matrix(w, z).transpose() * covector;
}

Eigen::MatrixXd two_form_matrix(const PoissonStructure& w, const Eigen::VectorXd& z) {
  check_length(w, z);
  const auto* s = std::get_if<SymplecticInverseVariant>(&w.variant());
  if (!s) throw VariantError("structure carries no two-form (not a symplectic_inverse variant)");
  return s->form.matrix(z);
}

Eigen::VectorXd flat(const PoissonStructure& w, const Eigen::VectorXd& vector,
                     const Eigen::VectorXd& z) {
  const Eigen::MatrixXd omega = two_form_matrix(w, z);
  if (vector.size() != omega.rows()) throw ArgumentError("vector length does not match chart dimension");
  // flat(v)_mu = Omega(mu, nu) v^nu, the inverse of sharp = W^T when W = -Omega^{-1}.
  return omega * vector;
}

double jacobi_residual(const BivectorAt& b) {
  const Eigen::MatrixXd& w = b.matrix;
  const Eigen::Index n = w.rows();
  double worst = 0.0;
  for (Eigen::Index l = 0; l < n; ++l)
    for (Eigen::Index m = l + 1; m < n; ++m)
      for (Eigen::Index k = m + 1; k < n; ++k) {
        double s = 0.0;
        for (Eigen::Index rho = 0; rho < n; ++rho) {
          const auto& d = b.partials[static_cast<std::size_t>(rho)];
          s += w(l, rho) * d(m, k) + w(m, rho) * d(k, l) + w(k, rho) * d(l, m);
        }
        worst = std::max(worst, std::abs(s));
      }
  return worst;
}

double jacobi_residual(const PoissonStructure& w, const Eigen::VectorXd& z) {
  return jacobi_residual(bivector_at(w, z));
}

int numerical_rank(const Eigen::MatrixXd& m, double tol_rel) {
  if (!(tol_rel > 0.0 && tol_rel < 1.0)) throw ArgumentError("rank tolerance must lie in (0, 1)");
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) >= tol_rel * s(0)) ++r;
  return r;
}

int rank_at(const PoissonStructure& w, const Eigen::VectorXd& z, double tol_rel) {
  int r = numerical_rank(bivector_matrix(w, z), tol_rel);
  // Singular values of an antisymmetric matrix come in pairs.
  if (r % 2 != 0) ++r;
  return r;
}

RankRange rank_over(const PoissonStructure& w, const std::vector<Eigen::VectorXd>& points,
                    double tol_rel) {
  RankRange out{0, 0};
  bool first = true;
  for (const auto& z : points) {
    const int r = rank_at(w, z, tol_rel);
    if (first) {
      out = {r, r};
      first = false;
    } else {
      out.min = std::min(out.min, r);
      out.max = std::max(out.max, r);
    }
  }
  return out;
}

PoissonStructure product(const PoissonStructure& first, const PoissonStructure& second) {
  const Chart& c1 = first.chart();
  const Chart& c2 = second.chart();
  std::vector<std::string> names = c1.names();
  std::set<std::string> used(names.begin(), names.end());
  for (const auto& n : c2.names()) {
    std::string candidate = n;
    for (int suffix = 2; used.contains(candidate); ++suffix) candidate = n + "_" + std::to_string(suffix);
    used.insert(candidate);
    names.push_back(candidate);
  }
  std::vector<Interval> box = c1.box();
  box.insert(box.end(), c2.box().begin(), c2.box().end());
  const std::size_t dim = names.size();
  std::optional<Predicate> guard;
  if (c1.guard()) guard = embed(*c1.guard(), dim, 0);
  if (c2.guard()) {
    Predicate g2 = embed(*c2.guard(), dim, c1.dimension());
    guard = guard ? (*guard && g2) : g2;
  }
  Chart chart(std::move(names), std::move(box), std::move(guard));
  // The factors keep their own charts; evaluation slices the point.
  return PoissonStructure(std::move(chart),
                          ProductVariant{std::make_shared<const PoissonStructure>(first),
                                         std::make_shared<const PoissonStructure>(second)});
}

double field_commutator_residual(const PoissonStructure& w, const Expression& f,
                                 const Expression& g, const Eigen::VectorXd& z) {
  check_arity(w, f);
  check_arity(w, g);
  const BivectorAt b = bivector_at(w, z);
  const Jet2 jf = eval_jet2(f, z);
  const Jet2 jg = eval_jet2(g, z);
  const Eigen::MatrixXd wt = b.matrix.transpose();
  const auto n = static_cast<Eigen::Index>(w.dimension());

  // Columns rho of the Jacobians d_rho theta^nu.
  auto field_jacobian = [&](const Jet2& j) {
    Eigen::MatrixXd d = wt * j.hessian;
    for (Eigen::Index rho = 0; rho < n; ++rho)
      d.col(rho) += b.partials[static_cast<std::size_t>(rho)].transpose() * j.gradient;
    return d;
  };
  const Eigen::VectorXd tf = wt * jf.gradient;
  const Eigen::VectorXd tg = wt * jg.gradient;
  const Eigen::VectorXd lie = field_jacobian(jg) * tf - field_jacobian(jf) * tg;

  Eigen::VectorXd grad_fg = jf.hessian * (b.matrix * jg.gradient) + jg.hessian * (wt * jf.gradient);
  for (Eigen::Index rho = 0; rho < n; ++rho)
    grad_fg[rho] += jf.gradient.dot(b.partials[static_cast<std::size_t>(rho)] * jg.gradient);
  return (lie - wt * grad_fg).norm();
}

}  // namespace poissonkit
