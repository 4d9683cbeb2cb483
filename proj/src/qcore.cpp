#include "lsm/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lsm/errors.hpp"

namespace lsm {

namespace {

std::size_t product(const std::vector<int>& dims) {
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    return n;
}

double norm2(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const auto& a : v) s += std::norm(a);
    return s;
}

std::vector<std::size_t> strides_of(const std::vector<int>& dims) {
    std::vector<std::size_t> st(dims.size(), 1);
    for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i) st[i] = st[i + 1] * dims[i + 1];
    return st;
}

void check_factor_list(const PureState& s, std::span<const int> factors) {
    std::vector<bool> seen(s.num_factors(), false);
    for (int f : factors) {
        if (f < 0 || f >= s.num_factors()) throw InvalidArgument("factor index out of range");
        if (seen[f]) throw InvalidArgument("factor listed twice");
        seen[f] = true;
    }
}

// Offsets of every joint index over a subset of factors (first listed factor
// most significant), given the row-major strides of the full state.
std::vector<std::size_t> offsets_for(const std::vector<int>& dims, const std::vector<std::size_t>& st,
                                     std::span<const int> factors) {
    std::vector<std::size_t> off{0};
    for (int f : factors) {
        std::vector<std::size_t> next;
        next.reserve(off.size() * dims[f]);
        for (std::size_t o : off)
            for (int k = 0; k < dims[f]; ++k) next.push_back(o + k * st[f]);
        off = std::move(next);
    }
    return off;
}

std::vector<int> complement(int n, std::span<const int> factors) {
    std::vector<bool> in(n, false);
    for (int f : factors) in[f] = true;
    std::vector<int> rest;
    for (int i = 0; i < n; ++i)
        if (!in[i]) rest.push_back(i);
    return rest;
}

// Index layout for "operate on these factors, iterate over the rest".
struct Split {
    std::vector<std::size_t> sub;   // offsets within the chosen factors
    std::vector<std::size_t> rest;  // base offsets of the remaining factors
    std::vector<int> rest_factors;
};

Split split(const PureState& s, std::span<const int> factors) {
    check_factor_list(s, factors);
    const auto st = strides_of(s.dims());
    Split sp;
    sp.rest_factors = complement(s.num_factors(), factors);
    sp.sub = offsets_for(s.dims(), st, factors);
    sp.rest = offsets_for(s.dims(), st, sp.rest_factors);
    return sp;
}

std::vector<int> dims_of(const PureState& s, const std::vector<int>& factors) {
    std::vector<int> d;
    d.reserve(factors.size());
    for (int f : factors) d.push_back(s.dims()[f]);
    return d;
}

// Coefficient matrix with rows indexed by `rows` factors and columns by the rest.
Matrix coefficient_matrix(const PureState& s, std::span<const int> rows) {
    const Split sp = split(s, rows);
    Matrix m(static_cast<Eigen::Index>(sp.sub.size()), static_cast<Eigen::Index>(sp.rest.size()));
    for (std::size_t j = 0; j < sp.sub.size(); ++j)
        for (std::size_t r = 0; r < sp.rest.size(); ++r) m(j, r) = s[sp.sub[j] + sp.rest[r]];
    return m;
}

void check_basis_fits(const PureState& s, std::span<const int> factors, int dim) {
    std::size_t joint = 1;
    for (int f : factors) joint *= s.dims()[f];
    if (joint != static_cast<std::size_t>(dim)) throw InvalidArgument("operator dimension does not match factors");
}

}  // namespace

// --- PureState -------------------------------------------------------------

PureState::PureState(std::vector<cplx> amps, std::vector<int> dims) : amps_(std::move(amps)), dims_(std::move(dims)) {
    for (int d : dims_)
        if (d < 2) throw InvalidArgument("factor dimension must be >= 2");
    if (product(dims_) > kMaxDimension) throw InvalidArgument("state exceeds maximum dense dimension");
    if (amps_.size() != product(dims_)) throw InvalidArgument("amplitude count does not match dims");
    if (std::abs(norm2(amps_) - 1.0) > kTauNorm) throw InvalidArgument("state is not normalized");
}

PureState PureState::normalized(std::vector<cplx> amps, std::vector<int> dims) {
    const double n = std::sqrt(norm2(amps));
    if (n < 1e-300) throw InvalidArgument("cannot normalize the zero vector");
    for (auto& a : amps) a /= n;
    return PureState(std::move(amps), std::move(dims));
}

PureState PureState::basis(std::vector<int> dims, std::size_t index) {
    const std::size_t n = product(dims);
    if (index >= n) throw InvalidArgument("basis index out of range");
    std::vector<cplx> a(n, 0.0);
    a[index] = 1.0;
    return PureState(std::move(a), std::move(dims));
}

// --- UnitaryOp / Basis -------------------------------------------------------

UnitaryOp::UnitaryOp(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1) throw InvalidArgument("unitary must be square");
    const Matrix err = m_.adjoint() * m_ - Matrix::Identity(m_.rows(), m_.cols());
    if (err.cwiseAbs().maxCoeff() > kTauNorm) throw InvalidArgument("matrix is not unitary");
}

UnitaryOp UnitaryOp::identity(int d) { return UnitaryOp(Matrix::Identity(d, d)); }
UnitaryOp UnitaryOp::adjoint() const { return UnitaryOp(m_.adjoint()); }
UnitaryOp UnitaryOp::operator*(const UnitaryOp& rhs) const { return UnitaryOp(m_ * rhs.m_); }

Basis::Basis(Matrix vectors, std::string name) : v_(std::move(vectors)), name_(std::move(name)) {
    if (v_.rows() != v_.cols() || v_.rows() < 1) throw InvalidArgument("basis must be complete (square matrix)");
    const Matrix err = v_.adjoint() * v_ - Matrix::Identity(v_.rows(), v_.cols());
    if (err.cwiseAbs().maxCoeff() > kTauNorm) throw InvalidArgument("basis is not orthonormal");
}

Basis Basis::pauli_z() { return Basis(Matrix::Identity(2, 2), "Z"); }

Basis Basis::pauli_x() {
    const double h = 1.0 / std::sqrt(2.0);
    Matrix m(2, 2);
    m << h, h, h, -h;
    return Basis(m, "X");
}

Basis Basis::bell() {
    Matrix m(4, 4);
    const BellKind kinds[] = {BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus};
    for (int k = 0; k < 4; ++k) {
        const auto s = bell_state(kinds[k]);
        for (int j = 0; j < 4; ++j) m(j, k) = s[j];
    }
    return Basis(m, "bell");
}

Basis Basis::computational(int d) {
    if (d < 2) throw InvalidArgument("basis dimension must be >= 2");
    return Basis(Matrix::Identity(d, d), "computational");
}

Basis Basis::named(const std::string& name, int d) {
    if (name == "Z" && d == 2) return pauli_z();
    if (name == "X" && d == 2) return pauli_x();
    if (name == "bell" && d == 4) return bell();
    if (name == "computational") return computational(d);
    throw InvalidArgument("unknown basis '" + name + "' for dimension " + std::to_string(d));
}

Bipartition::Bipartition(std::vector<int> left, int num_factors) : left_(std::move(left)), n_(num_factors) {
    std::sort(left_.begin(), left_.end());
    if (std::adjacent_find(left_.begin(), left_.end()) != left_.end())
        throw InvalidArgument("bipartition lists a factor twice");
    for (int f : left_)
        if (f < 0 || f >= n_) throw InvalidArgument("bipartition factor out of range");
    right_ = complement(n_, left_);
    if (left_.empty() || right_.empty()) throw InvalidArgument("trivial cut");
}

// --- labels ----------------------------------------------------------------

std::string to_string(BellKind k) {
    switch (k) {
        case BellKind::PhiPlus: return "phi+";
        case BellKind::PhiMinus: return "phi-";
        case BellKind::PsiPlus: return "psi+";
        case BellKind::PsiMinus: return "psi-";
    }
    return "?";
}

std::string to_string(Pauli p) { return p == Pauli::X ? "X" : "Z"; }

BellKind bell_kind_from_string(const std::string& s) {
    if (s == "phi+") return BellKind::PhiPlus;
    if (s == "phi-") return BellKind::PhiMinus;
    if (s == "psi+") return BellKind::PsiPlus;
    if (s == "psi-") return BellKind::PsiMinus;
    throw InvalidArgument("unknown Bell state '" + s + "'");
}

Pauli pauli_from_string(const std::string& s) {
    if (s == "X") return Pauli::X;
    if (s == "Z") return Pauli::Z;
    throw InvalidArgument("unknown Pauli '" + s + "'");
}

Matrix pauli_matrix(char which) {
    Matrix m = Matrix::Zero(2, 2);
    switch (which) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: throw InvalidArgument("unknown Pauli symbol");
    }
    return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// --- constructors ----------------------------------------------------------

PureState tensor(std::span<const PureState> parts) {
    if (parts.empty()) throw InvalidArgument("tensor of an empty list");
    std::vector<cplx> amps{1.0};
    std::vector<int> dims;
    for (const auto& p : parts) {
        if (amps.size() * p.size() > kMaxDimension) throw InvalidArgument("state exceeds maximum dense dimension");
        std::vector<cplx> next;
        next.reserve(amps.size() * p.size());
        for (const auto& a : amps)
            for (const auto& b : p.amps()) next.push_back(a * b);
        amps = std::move(next);
        dims.insert(dims.end(), p.dims().begin(), p.dims().end());
    }
    return PureState(std::move(amps), std::move(dims));
}

PureState tensor(std::initializer_list<PureState> parts) {
    return tensor(std::span<const PureState>(parts.begin(), parts.size()));
}

PureState bell_state(BellKind kind) {
    const double h = 1.0 / std::sqrt(2.0);
    std::vector<cplx> a(4, 0.0);
    switch (kind) {
        case BellKind::PhiPlus: a[0] = h, a[3] = h; break;
        case BellKind::PhiMinus: a[0] = h, a[3] = -h; break;
        case BellKind::PsiPlus: a[1] = h, a[2] = h; break;
        case BellKind::PsiMinus: a[1] = h, a[2] = -h; break;
    }
    return PureState(std::move(a), {2, 2});
}

PureState ghz_plus(int d) {
    if (d < 2) throw InvalidArgument("ghz_plus needs d >= 2");
    std::vector<cplx> a(static_cast<std::size_t>(d) * d, 0.0);
    const double h = 1.0 / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < d; ++i) a[static_cast<std::size_t>(i) * d + i] = h;
    return PureState(std::move(a), {d, d});
}

// --- dynamics --------------------------------------------------------------

PureState apply_local_unitary(const PureState& s, std::span<const int> factors, const UnitaryOp& u) {
    check_factor_list(s, factors);
    check_basis_fits(s, factors, u.dim());
    const Split sp = split(s, factors);
    const Matrix& m = u.matrix();
    std::vector<cplx> out(s.amps());
    Eigen::VectorXcd v(u.dim());
    for (std::size_t base : sp.rest) {
        for (int j = 0; j < u.dim(); ++j) v[j] = s[base + sp.sub[j]];
        const Eigen::VectorXcd w = m * v;
        for (int j = 0; j < u.dim(); ++j) out[base + sp.sub[j]] = w[j];
    }
    return PureState::normalized(std::move(out), s.dims());
}

std::vector<cplx> canonical_phase(std::vector<cplx> amps) {
    for (const auto& a : amps) {
        if (std::abs(a) > 1e-10) {
            const cplx ph = std::conj(a) / std::abs(a);
            for (auto& x : amps) x *= ph;
            break;
        }
    }
    return amps;
}

namespace {

// Projects onto each basis vector; `keep` selects whether the measured factors
// remain in the post-state (collapsed onto the basis vector) or are removed.
std::vector<MeasurementOutcome> measure_impl(const PureState& s, std::span<const int> factors, const Basis& basis,
                                             bool keep) {
    check_factor_list(s, factors);
    check_basis_fits(s, factors, basis.dim());
    const Split sp = split(s, factors);
    const Matrix& b = basis.vectors();
    std::vector<MeasurementOutcome> out;
    for (int k = 0; k < basis.dim(); ++k) {
        std::vector<cplx> rest(sp.rest.size(), 0.0);
        double p = 0.0;
        for (std::size_t r = 0; r < sp.rest.size(); ++r) {
            cplx c = 0.0;
            for (int j = 0; j < basis.dim(); ++j) c += std::conj(b(j, k)) * s[sp.rest[r] + sp.sub[j]];
            rest[r] = c;
            p += std::norm(c);
        }
        if (p < kPruneProbability) continue;
        const double scale = 1.0 / std::sqrt(p);
        if (keep) {
            std::vector<cplx> post(s.size(), 0.0);
            for (std::size_t r = 0; r < sp.rest.size(); ++r)
                for (int j = 0; j < basis.dim(); ++j) post[sp.rest[r] + sp.sub[j]] = b(j, k) * rest[r] * scale;
            out.push_back({k, p, PureState::normalized(canonical_phase(std::move(post)), s.dims())});
        } else {
            for (auto& c : rest) c *= scale;
            out.push_back({k, p, PureState::normalized(canonical_phase(std::move(rest)), dims_of(s, sp.rest_factors))});
        }
    }
    return out;
}

}  // namespace

std::vector<MeasurementOutcome> measure_projective(const PureState& s, std::span<const int> factors,
                                                   const Basis& basis) {
    return measure_impl(s, factors, basis, true);
}

std::vector<MeasurementOutcome> measure_and_discard(const PureState& s, std::span<const int> factors,
                                                    const Basis& basis) {
    return measure_impl(s, factors, basis, false);
}

// --- entanglement ----------------------------------------------------------

std::vector<double> schmidt_coefficients(const PureState& s, const Bipartition& cut) {
    if (cut.num_factors() != s.num_factors()) throw InvalidArgument("cut does not match state");
    const Matrix m = coefficient_matrix(s, cut.left());
    Eigen::BDCSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    std::vector<double> out;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > 0.0) out.push_back(sv[i]);
    std::sort(out.rbegin(), out.rend());
    return out;
}

double entanglement_entropy(const PureState& s, const Bipartition& cut) {
    double h = 0.0;
    for (double c : schmidt_coefficients(s, cut)) {
        const double l = c * c;
        if (l > 1e-300) h -= l * std::log2(l);
    }
    return std::max(h, 0.0);
}

// --- reorderings -----------------------------------------------------------

PureState permute_factors(const PureState& s, std::span<const int> perm) {
    if (static_cast<int>(perm.size()) != s.num_factors()) throw InvalidArgument("permutation has wrong length");
    check_factor_list(s, perm);
    // Enumerating the permuted factor list in row-major order gives exactly
    // the source offset of every target index.
    const auto st = strides_of(s.dims());
    const auto off = offsets_for(s.dims(), st, perm);
    std::vector<cplx> out(s.size());
    for (std::size_t i = 0; i < off.size(); ++i) out[i] = s[off[i]];
    std::vector<int> dims;
    for (int p : perm) dims.push_back(s.dims()[p]);
    return PureState(std::move(out), std::move(dims));
}

PureState reshape(const PureState& s, std::vector<int> dims) {
    if (product(dims) != s.size()) throw InvalidArgument("reshape must preserve total dimension");
    return PureState(s.amps(), std::move(dims));
}

cplx inner(const PureState& a, const PureState& b) {
    if (a.size() != b.size()) throw InvalidArgument("inner product of different dimensions");
    cplx acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double fidelity(const PureState& a, const PureState& b) { return std::norm(inner(a, b)); }

Matrix reduced_density(const PureState& s, std::span<const int> factors) {
    if (factors.empty()) throw InvalidArgument("reduced density needs at least one factor");
    const Matrix m = coefficient_matrix(s, factors);
    return m * m.adjoint();
}

std::optional<PureState> factor_state(const PureState& s, std::span<const int> factors) {
    check_factor_list(s, factors);
    if (factors.empty()) return std::nullopt;
    std::vector<int> fdims;
    for (int f : factors) fdims.push_back(s.dims()[f]);
    if (static_cast<int>(factors.size()) == s.num_factors()) {
        return PureState::normalized(canonical_phase(permute_factors(s, factors).amps()), fdims);
    }
    const Matrix m = coefficient_matrix(s, factors);
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const double top = svd.singularValues()[0];
    if (top * top < 1.0 - kTauNorm) return std::nullopt;
    std::vector<cplx> a(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) a[i] = svd.matrixU()(i, 0);
    return PureState::normalized(canonical_phase(std::move(a)), fdims);
}

}  // namespace lsm
