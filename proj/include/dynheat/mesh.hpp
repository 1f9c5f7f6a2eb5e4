#pragma once

// P1 finite elements on (0, L). Node 0 carries the Dirichlet condition,
// node N is the dynamic boundary point.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace dynheat {

class Mesh1D {
public:
    /// Strictly increasing nodes starting at 0; at least 2 elements.
    explicit Mesh1D(std::vector<double> nodes);
    static Mesh1D uniform(double L, int N);

    double length() const { return nodes_.back(); }
    int elements() const { return static_cast<int>(nodes_.size()) - 1; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }
    double node(std::size_t i) const { return nodes_[i]; }
    double h(int element) const { return nodes_[element + 1] - nodes_[element]; }
    bool is_uniform() const { return uniform_; }

    /// Every element bisected; the coarse space is a subspace of the fine one.
    Mesh1D refined() const;
    std::uint64_t fingerprint() const;

private:
    std::vector<double> nodes_;
    bool uniform_ = false;
};

using MeshPtr = std::shared_ptr<const Mesh1D>;

MeshPtr build_mesh(double L, int N);

/// Nodal coefficients of a P1 function. Constrained fields vanish at node 0.
class FemField {
public:
    FemField(MeshPtr mesh, std::vector<double> coefficients, bool constrained = true);

    static FemField zero(MeshPtr mesh);
    /// Nodal interpolant; for constrained fields the value at x = 0 is forced to 0.
    static FemField interpolate(MeshPtr mesh, const std::function<double(double)>& fn,
                                bool constrained = true);

    const Mesh1D& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    const std::vector<double>& coefficients() const { return c_; }
    std::vector<double>& coefficients() { return c_; }
    double operator[](std::size_t i) const { return c_[i]; }
    std::size_t size() const { return c_.size(); }
    bool constrained() const { return constrained_; }
    bool is_zero() const;

    /// Piecewise-linear evaluation at x in [0, L].
    double operator()(double x) const;
    /// Nodal interpolant on another mesh of the same length. Exact when
    /// `target` refines this field's mesh.
    FemField transfer(MeshPtr target) const;

    FemField& operator+=(const FemField& other);
    FemField& operator-=(const FemField& other);
    FemField& operator*=(double s);

private:
    MeshPtr mesh_;
    std::vector<double> c_;
    bool constrained_;
};

FemField operator+(FemField a, const FemField& b);
FemField operator-(FemField a, const FemField& b);
FemField operator*(double s, FemField a);

/// Tridiagonal matrix; lower[0] and upper[n-1] are unused.
struct TridiagonalMatrix {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    explicit TridiagonalMatrix(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    std::size_t size() const { return diag.size(); }
    std::vector<double> apply(std::span<const double> x) const;
    /// |T| |x| row by row; a rounding scale for residuals.
    std::vector<double> apply_abs(std::span<const double> x) const;
    double quadratic_form(std::span<const double> x) const;
    /// Principal submatrix without the first row and column.
    TridiagonalMatrix drop_first() const;
    double at(std::size_t i, std::size_t j) const;
};

/// Thomas algorithm without pivoting. Throws NumericalError on a zero or
/// non-finite pivot.
std::vector<double> solve_tridiagonal(const TridiagonalMatrix& a, std::span<const double> rhs);

enum class MassMode { Consistent, Lumped };

struct AssembledOperators {
    MeshPtr mesh;
    MassMode mass_mode = MassMode::Consistent;
    TridiagonalMatrix mass;       ///< full (N+1)x(N+1)
    TridiagonalMatrix stiffness;  ///< full (N+1)x(N+1), singular before the constraint

    std::size_t boundary_index() const { return mass.size() - 1; }
    /// Operators on the unknowns 1..N.
    TridiagonalMatrix constrained_mass() const { return mass.drop_first(); }
    TridiagonalMatrix constrained_stiffness() const { return stiffness.drop_first(); }
};

AssembledOperators assemble(MeshPtr mesh, MassMode mode = MassMode::Consistent);

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

GaussRule gauss_legendre(int points);
/// Points per element for integrating |u_h|^p: max(3, ceil((p+2)/2)).
int lp_gauss_points(double p);

/// Sum over elements of the Gauss rule applied to fn(x, u_h(x)).
double integrate(const FemField& u, int points, const std::function<double(double, double)>& fn);
/// b_i = int fn(x, u_h) phi_i for all nodes.
std::vector<double> load_vector(const FemField& u, int points,
                                const std::function<double(double, double)>& fn);
/// J_ij = int fn(x, u_h) phi_i phi_j.
TridiagonalMatrix weighted_mass(const FemField& u, int points,
                                const std::function<double(double, double)>& fn);

double norm_Lp(const FemField& u, double p);
double norm_L2(const FemField& u);
double norm_gradL2(const FemField& u);
double norm_H1(const FemField& u);
double trace_gamma1(const FemField& u);
double l2_inner(const FemField& a, const FemField& b);

/// "x,u" rows.
void write_field_csv(std::ostream& os, const FemField& u);

}  // namespace dynheat
