#include "dynheat/mesh.hpp"

#include "dynheat/errors.hpp"
#include "dynheat/report.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

namespace dynheat {

// ---------------------------------------------------------------------------
// Mesh1D

Mesh1D::Mesh1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 3) throw DomainError("Mesh1D: need at least 2 elements");
    if (nodes_.front() != 0.0) throw DomainError("Mesh1D: first node must be 0");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i] > nodes_[i - 1]) || !std::isfinite(nodes_[i]))
            throw DomainError("Mesh1D: nodes must be finite and strictly increasing");
    }
    const double h0 = nodes_[1] - nodes_[0];
    uniform_ = std::all_of(nodes_.begin() + 1, nodes_.end(), [&, i = std::size_t{0}](double) mutable {
        ++i;
        return std::abs((nodes_[i] - nodes_[i - 1]) - h0) <= 1e-12 * nodes_.back();
    });
}

Mesh1D Mesh1D::uniform(double L, int N) {
    if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("build_mesh: L must be positive");
    if (N < 2) throw DomainError("build_mesh: N must be >= 2");
    std::vector<double> nodes(static_cast<std::size_t>(N) + 1);
    for (int i = 0; i <= N; ++i) nodes[i] = L * i / N;
    nodes.back() = L;
    return Mesh1D(std::move(nodes));
}

Mesh1D Mesh1D::refined() const {
    std::vector<double> fine;
    fine.reserve(2 * nodes_.size() - 1);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        fine.push_back(nodes_[i]);
        fine.push_back(0.5 * (nodes_[i] + nodes_[i + 1]));
    }
    fine.push_back(nodes_.back());
    return Mesh1D(std::move(fine));
}

std::uint64_t Mesh1D::fingerprint() const { return fnv1a(std::span<const double>(nodes_)); }

MeshPtr build_mesh(double L, int N) { return std::make_shared<const Mesh1D>(Mesh1D::uniform(L, N)); }

// ---------------------------------------------------------------------------
// FemField

FemField::FemField(MeshPtr mesh, std::vector<double> coefficients, bool constrained)
    : mesh_(std::move(mesh)), c_(std::move(coefficients)), constrained_(constrained) {
    if (!mesh_) throw DomainError("FemField: null mesh");
    if (c_.size() != mesh_->size()) throw MismatchError("FemField: coefficient count != node count");
    if (constrained_ && c_[0] != 0.0) throw DomainError("FemField: constrained field must vanish at x=0");
}

FemField FemField::zero(MeshPtr mesh) {
    const auto n = mesh->size();
    return FemField(std::move(mesh), std::vector<double>(n, 0.0));
}

FemField FemField::interpolate(MeshPtr mesh, const std::function<double(double)>& fn,
                               bool constrained) {
    std::vector<double> c(mesh->size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = fn(mesh->node(i));
    if (constrained) c[0] = 0.0;
    return FemField(std::move(mesh), std::move(c), constrained);
}

bool FemField::is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](double v) { return v == 0.0; });
}

double FemField::operator()(double x) const {
    const auto& n = mesh_->nodes();
    if (x <= n.front()) return c_.front();
    if (x >= n.back()) return c_.back();
    const auto it = std::upper_bound(n.begin(), n.end(), x);
    const auto i = static_cast<std::size_t>(it - n.begin()) - 1;
    const double s = (x - n[i]) / (n[i + 1] - n[i]);
    return (1.0 - s) * c_[i] + s * c_[i + 1];
}

FemField FemField::transfer(MeshPtr target) const {
    if (std::abs(target->length() - mesh_->length()) > 1e-12 * mesh_->length())
        throw MismatchError("FemField::transfer: domain lengths differ");
    std::vector<double> c(target->size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (*this)(target->node(i));
    if (constrained_) c[0] = 0.0;
    return FemField(std::move(target), std::move(c), constrained_);
}

static void require_same_mesh(const FemField& a, const FemField& b) {
    if (a.mesh_ptr() != b.mesh_ptr() && a.mesh().nodes() != b.mesh().nodes())
        throw MismatchError("fields live on different meshes");
}

FemField& FemField::operator+=(const FemField& other) {
    require_same_mesh(*this, other);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += other.c_[i];
    return *this;
}

FemField& FemField::operator-=(const FemField& other) {
    require_same_mesh(*this, other);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= other.c_[i];
    return *this;
}

FemField& FemField::operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
}

FemField operator+(FemField a, const FemField& b) { return a += b; }
FemField operator-(FemField a, const FemField& b) { return a -= b; }
FemField operator*(double s, FemField a) { return a *= s; }

// ---------------------------------------------------------------------------
// Tridiagonal algebra

std::vector<double> TridiagonalMatrix::apply(std::span<const double> x) const {
    const std::size_t n = size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += lower[i] * x[i - 1];
        if (i + 1 < n) s += upper[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

std::vector<double> TridiagonalMatrix::apply_abs(std::span<const double> x) const {
    const std::size_t n = size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = std::abs(diag[i] * x[i]);
        if (i > 0) s += std::abs(lower[i] * x[i - 1]);
        if (i + 1 < n) s += std::abs(upper[i] * x[i + 1]);
        y[i] = s;
    }
    return y;
}

double TridiagonalMatrix::quadratic_form(std::span<const double> x) const {
    const auto y = apply(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += x[i] * y[i];
    return s;
}

TridiagonalMatrix TridiagonalMatrix::drop_first() const {
    TridiagonalMatrix out(size() - 1);
    for (std::size_t i = 1; i < size(); ++i) {
        out.diag[i - 1] = diag[i];
        out.lower[i - 1] = i > 1 ? lower[i] : 0.0;
        out.upper[i - 1] = upper[i];
    }
    return out;
}

double TridiagonalMatrix::at(std::size_t i, std::size_t j) const {
    if (i == j) return diag[i];
    if (j + 1 == i) return lower[i];
    if (i + 1 == j) return upper[i];
    return 0.0;
}

std::vector<double> solve_tridiagonal(const TridiagonalMatrix& a, std::span<const double> rhs) {
    const std::size_t n = a.size();
    if (rhs.size() != n) throw MismatchError("solve_tridiagonal: size mismatch");
    std::vector<double> c(n), d(n);
    double piv = a.diag[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) piv = a.diag[i] - a.lower[i] * c[i - 1];
        if (piv == 0.0 || !std::isfinite(piv))
            throw NumericalError("solve_tridiagonal: singular pivot", piv);
        c[i] = i + 1 < n ? a.upper[i] / piv : 0.0;
        d[i] = (rhs[i] - (i > 0 ? a.lower[i] * d[i - 1] : 0.0)) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
    return d;
}

// ---------------------------------------------------------------------------
// Assembly

AssembledOperators assemble(MeshPtr mesh, MassMode mode) {
    const std::size_t n = mesh->size();
    AssembledOperators ops;
    ops.mass_mode = mode;
    ops.mass = TridiagonalMatrix(n);
    ops.stiffness = TridiagonalMatrix(n);
    for (int e = 0; e < mesh->elements(); ++e) {
        const double h = mesh->h(e);
        const auto i = static_cast<std::size_t>(e);
        if (mode == MassMode::Consistent) {
            ops.mass.diag[i] += h / 3.0;
            ops.mass.diag[i + 1] += h / 3.0;
            ops.mass.upper[i] += h / 6.0;
            ops.mass.lower[i + 1] += h / 6.0;
        } else {
            ops.mass.diag[i] += h / 2.0;
            ops.mass.diag[i + 1] += h / 2.0;
        }
        ops.stiffness.diag[i] += 1.0 / h;
        ops.stiffness.diag[i + 1] += 1.0 / h;
        ops.stiffness.upper[i] -= 1.0 / h;
        ops.stiffness.lower[i + 1] -= 1.0 / h;
    }
    ops.mesh = std::move(mesh);
    return ops;
}

// ---------------------------------------------------------------------------
// Quadrature

GaussRule gauss_legendre(int points) {
    if (points < 1 || points > 64) throw DomainError("gauss_legendre: 1..64 points");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find(points); it != cache.end()) return it->second;

    GaussRule rule;
    for (double z : boost::math::legendre_p_zeros<double>(points)) {
        const double d = boost::math::legendre_p_prime(points, z);
        const double w = 2.0 / ((1.0 - z * z) * d * d);
        rule.x.push_back(z);
        rule.w.push_back(w);
        if (z != 0.0) {
            rule.x.push_back(-z);
            rule.w.push_back(w);
        }
    }
    std::vector<std::size_t> order(rule.x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return rule.x[a] < rule.x[b]; });
    GaussRule sorted;
    for (auto i : order) {
        sorted.x.push_back(rule.x[i]);
        sorted.w.push_back(rule.w[i]);
    }
    return cache[points] = sorted;
}

int lp_gauss_points(double p) {
    return std::max(3, static_cast<int>(std::ceil((p + 2.0) / 2.0)));
}

namespace {

// Calls visit(element, x, weight*h/2, phi_left, phi_right, u) at every Gauss point.
template <class Visit>
void for_each_gauss_point(const FemField& u, int points, Visit&& visit) {
    const auto rule = gauss_legendre(points);
    const auto& mesh = u.mesh();
    for (int e = 0; e < mesh.elements(); ++e) {
        const double x0 = mesh.node(e), h = mesh.h(e);
        const double u0 = u[e], u1 = u[e + 1];
        for (std::size_t k = 0; k < rule.x.size(); ++k) {
            const double s = 0.5 * (1.0 + rule.x[k]);
            visit(e, x0 + s * h, 0.5 * h * rule.w[k], 1.0 - s, s, (1.0 - s) * u0 + s * u1);
        }
    }
}

}  // namespace

double integrate(const FemField& u, int points, const std::function<double(double, double)>& fn) {
    double total = 0.0;
    for_each_gauss_point(u, points, [&](int, double x, double w, double, double, double val) {
        total += w * fn(x, val);
    });
    return total;
}

std::vector<double> load_vector(const FemField& u, int points,
                                const std::function<double(double, double)>& fn) {
    std::vector<double> b(u.size(), 0.0);
    for_each_gauss_point(u, points, [&](int e, double x, double w, double pl, double pr, double val) {
        const double fv = w * fn(x, val);
        b[e] += fv * pl;
        b[e + 1] += fv * pr;
    });
    return b;
}

TridiagonalMatrix weighted_mass(const FemField& u, int points,
                                const std::function<double(double, double)>& fn) {
    TridiagonalMatrix m(u.size());
    for_each_gauss_point(u, points, [&](int e, double x, double w, double pl, double pr, double val) {
        const double fv = w * fn(x, val);
        m.diag[e] += fv * pl * pl;
        m.diag[e + 1] += fv * pr * pr;
        m.upper[e] += fv * pl * pr;
        m.lower[e + 1] += fv * pl * pr;
    });
    return m;
}

// ---------------------------------------------------------------------------
// Norms

double norm_Lp(const FemField& u, double p) {
    if (!(p >= 1.0)) throw DomainError("norm_Lp: p must be >= 1");
    const double s = integrate(u, lp_gauss_points(p),
                               [p](double, double v) { return std::pow(std::abs(v), p); });
    return std::pow(s, 1.0 / p);
}

double norm_L2(const FemField& u) { return std::sqrt(l2_inner(u, u)); }

double norm_gradL2(const FemField& u) {
    const auto& mesh = u.mesh();
    double s = 0.0;
    for (int e = 0; e < mesh.elements(); ++e) {
        const double d = u[e + 1] - u[e];
        s += d * d / mesh.h(e);
    }
    return std::sqrt(s);
}

double norm_H1(const FemField& u) {
    const double a = norm_L2(u), b = norm_gradL2(u);
    return std::sqrt(a * a + b * b);
}

double trace_gamma1(const FemField& u) { return u.coefficients().back(); }

double l2_inner(const FemField& a, const FemField& b) {
    require_same_mesh(a, b);
    const auto& mesh = a.mesh();
    double s = 0.0;
    for (int e = 0; e < mesh.elements(); ++e) {
        const double a0 = a[e], a1 = a[e + 1], b0 = b[e], b1 = b[e + 1];
        s += mesh.h(e) / 6.0 * (2.0 * a0 * b0 + a0 * b1 + a1 * b0 + 2.0 * a1 * b1);
    }
    return s;
}

void write_field_csv(std::ostream& os, const FemField& u) {
    os << "x,u\n";
    for (std::size_t i = 0; i < u.size(); ++i)
        os << format_double(u.mesh().node(i)) << ',' << format_double(u[i]) << '\n';
}

}  // namespace dynheat
