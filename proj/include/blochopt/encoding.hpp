#pragma once

#include <vector>

#include <Eigen/Dense>

#include "blochopt/errors.hpp"
#include "blochopt/qsim.hpp"

namespace blochopt::encoding {

/// Closed interval [lo, hi] by default; half_open marks [lo, hi).
struct VariableDomain {
    double lo = 0.0;
    double hi = 1.0;
    bool half_open = false;
};

/// pure: 2 variables per qubit (theta, phi channels).
/// mixed: 3 variables per qubit (theta, phi, r channels).
enum class Mode { pure, mixed };

int vars_per_qubit(Mode mode);
int capacity(Mode mode, int n_qubits);

enum class Channel { theta, phi, r };

struct Slot {
    int qubit = 0;
    Channel channel = Channel::theta;
};

/// Variable-major assignment: variable i lives on qubit i / k, channel i % k,
/// with k = vars_per_qubit(mode). Channel native ranges are theta in [0, pi],
/// phi in [0, 2*pi), r in [0, 1); decode maps them affinely onto each domain.
struct EncodingMap {
    Mode mode = Mode::pure;
    int n_vars = 0;
    int n_qubits = 0;
    std::vector<Slot> slots;
    std::vector<VariableDomain> domains;

    /// n_qubits = 0 derives the smallest register that fits; an explicit
    /// count must satisfy capacity(mode, n_qubits) >= n_vars or this throws
    /// ContractViolation.
    static EncodingMap make(Mode mode, std::vector<VariableDomain> domains,
                            int n_qubits = 0);
};

/// Reads one variable value out of a measured qubit.
double decode_slot(const qsim::BlochParams& bloch, Channel channel,
                   const VariableDomain& domain);

/// Decodes the full variable vector from per-qubit Bloch readings.
/// blochs.size() must equal map.n_qubits.
Eigen::VectorXd decode(const std::vector<qsim::BlochParams>& blochs,
                       const EncodingMap& map);

}  // namespace blochopt::encoding
