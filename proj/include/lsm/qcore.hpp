#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lsm {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

// Tolerance for every normalization, unitarity and probability check.
inline constexpr double kTauNorm = 1e-9;
// Branches below this probability are dropped instead of renormalized.
inline constexpr double kPruneProbability = 1e-12;
// Largest dense state the simulator accepts (2^17 amplitudes).
inline constexpr std::size_t kMaxDimension = std::size_t{1} << 17;

/// Dense pure state over an ordered list of tensor factors.
///
/// Factor 0 is the most significant digit of the amplitude index. A state
/// with no factors is a scalar (length-1 vector) and only arises when every
/// factor of a larger state has been measured away.
class PureState {
  public:
    /// Validates dims (each >= 2), length and unit norm within kTauNorm.
    PureState(std::vector<cplx> amps, std::vector<int> dims);

    /// Rescales `amps` to unit norm; rejects the zero vector.
    static PureState normalized(std::vector<cplx> amps, std::vector<int> dims);
    static PureState basis(std::vector<int> dims, std::size_t index);

    const std::vector<cplx>& amps() const { return amps_; }
    const std::vector<int>& dims() const { return dims_; }
    std::size_t size() const { return amps_.size(); }
    int num_factors() const { return static_cast<int>(dims_.size()); }
    cplx operator[](std::size_t i) const { return amps_[i]; }

    bool operator==(const PureState&) const = default;

  private:
    std::vector<cplx> amps_;
    std::vector<int> dims_;
};

/// Square unitary matrix.
class UnitaryOp {
  public:
    explicit UnitaryOp(Matrix m);

    const Matrix& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }

    static UnitaryOp identity(int d);
    UnitaryOp adjoint() const;
    UnitaryOp operator*(const UnitaryOp& rhs) const;

    bool operator==(const UnitaryOp& o) const { return m_ == o.m_; }

  private:
    Matrix m_;
};

/// Orthonormal, complete measurement basis; column k is outcome k.
/// Named bases ("Z", "X", "bell", "computational") keep their name so that
/// serialized protocols stay readable.
class Basis {
  public:
    Basis(Matrix vectors, std::string name = {});

    static Basis pauli_z();
    static Basis pauli_x();
    static Basis bell();
    static Basis computational(int d);
    /// Resolves a basis name for a joint space of dimension `d`.
    static Basis named(const std::string& name, int d);

    const Matrix& vectors() const { return v_; }
    int dim() const { return static_cast<int>(v_.rows()); }
    const std::string& name() const { return name_; }

    bool operator==(const Basis& o) const { return name_ == o.name_ && v_ == o.v_; }

  private:
    Matrix v_;
    std::string name_;
};

/// Split of a state's factors into two nonempty complementary sets.
class Bipartition {
  public:
    Bipartition(std::vector<int> left, int num_factors);

    const std::vector<int>& left() const { return left_; }
    const std::vector<int>& right() const { return right_; }
    int num_factors() const { return n_; }

  private:
    std::vector<int> left_;
    std::vector<int> right_;
    int n_;
};

enum class BellKind { PhiPlus, PhiMinus, PsiPlus, PsiMinus };
enum class Pauli { X, Z };

std::string to_string(BellKind k);
std::string to_string(Pauli p);
BellKind bell_kind_from_string(const std::string& s);
Pauli pauli_from_string(const std::string& s);

Matrix pauli_matrix(char which);  // 'I', 'X', 'Y', 'Z'
Matrix kron(const Matrix& a, const Matrix& b);

struct MeasurementOutcome {
    int index;
    double probability;
    PureState post;
};

// --- operations ---------------------------------------------------------

PureState tensor(std::span<const PureState> parts);
PureState tensor(std::initializer_list<PureState> parts);

PureState bell_state(BellKind kind);
/// (1/sqrt d) sum_i |ii> on dims [d, d].
PureState ghz_plus(int d);

PureState apply_local_unitary(const PureState& s, std::span<const int> factors, const UnitaryOp& u);

/// Full projective measurement on `factors`; post-states keep every factor.
/// Outcomes with probability below kPruneProbability are omitted.
std::vector<MeasurementOutcome> measure_projective(const PureState& s, std::span<const int> factors,
                                                   const Basis& basis);

/// Same statistics as measure_projective, but the measured factors are
/// removed from each post-state (remaining factors keep their order).
std::vector<MeasurementOutcome> measure_and_discard(const PureState& s, std::span<const int> factors,
                                                    const Basis& basis);

std::vector<double> schmidt_coefficients(const PureState& s, const Bipartition& cut);
/// Von Neumann entropy of the reduced state on cut.left(), in ebits.
double entanglement_entropy(const PureState& s, const Bipartition& cut);

/// Result factor i is input factor perm[i].
PureState permute_factors(const PureState& s, std::span<const int> perm);
/// Re-reads the same amplitudes under a finer (or coarser) factorization.
PureState reshape(const PureState& s, std::vector<int> dims);

cplx inner(const PureState& a, const PureState& b);  // <a|b>
double fidelity(const PureState& a, const PureState& b);

/// Reduced density matrix on `factors` (in the listed order).
Matrix reduced_density(const PureState& s, std::span<const int> factors);

/// If `s` is a product across (factors | rest) within kTauNorm, returns the
/// pure state held by `factors`.
std::optional<PureState> factor_state(const PureState& s, std::span<const int> factors);

/// Fixes the global phase so the first non-negligible amplitude is real and
/// positive.
std::vector<cplx> canonical_phase(std::vector<cplx> amps);

}  // namespace lsm
