#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "blochopt/errors.hpp"

namespace blochopt::qsim {

/// Dense register state over n_qubits qubits. Amplitude index bit q holds the
/// value of qubit q, so amps[i] multiplies |b_{n-1} ... b_1 b_0> with b_q = (i >> q) & 1.
struct StateVector {
    Eigen::VectorXcd amps;
    int n_qubits = 0;

    static StateVector zero_state(int n_qubits);
    double norm() const { return amps.norm(); }
};

enum class GateKind { RX, RY, RZ, H, CNOT };

/// One circuit operation. Rotations read their angle from omega[param_slot]
/// when a parameter vector is in play; fixed-angle use passes the angle directly.
struct GateOp {
    GateKind kind = GateKind::RX;
    int target = 0;
    int control = -1;    // CNOT only
    int param_slot = -1; // -1 means the op takes no parameter
};

/// Layered circuit: each layer applies RY(w) then RZ(w) on every qubit,
/// then the entangling CNOT chain (control q -> target q + 1). The chain is
/// present in every layer, including the last.
struct Ansatz {
    int n_qubits = 0;
    int layers = 0;
    int n_params = 0;
    std::vector<GateOp> ops;
};

/// Parameter slot layout: 2 * (layer * n_qubits + qubit) for the RY angle,
/// the next slot for the RZ angle. n_params = 2 * n_qubits * layers.
Ansatz layered_ansatz(int n_qubits, int layers);

/// Applies one gate in place. `angle` is ignored for H and CNOT.
void apply_gate(StateVector& state, const GateOp& op, double angle = 0.0);

/// Runs the full ansatz on `state` with angles taken from `omega`.
/// Throws ContractViolation when omega.size() != ansatz.n_params or the
/// register width does not match.
StateVector apply_circuit(const StateVector& state, const Ansatz& ansatz,
                          const Eigen::VectorXd& omega);

/// Traces out every qubit except `qubit`; result is the 2x2 density matrix.
Eigen::Matrix2cd reduced_density_matrix(const StateVector& state, int qubit);

/// Spherical Bloch coordinates: theta in [0, pi], phi in [0, 2*pi), r in [0, 1].
/// A fully mixed qubit (r below 1e-12) reports (0, 0, 0).
struct BlochParams {
    double theta = 0.0;
    double phi = 0.0;
    double r = 0.0;
};

/// Extracts (theta, phi, r) from a single-qubit density matrix via the Pauli
/// expectations n_x = 2 Re rho01, n_y = -2 Im rho01, n_z = rho00 - rho11.
/// Throws ContractViolation when the trace is not 1 within 1e-9.
BlochParams bloch_params(const Eigen::Matrix2cd& rho);

BlochParams exact_bloch_params(const StateVector& state, int qubit);

/// Tomography with finite statistics: for each Pauli axis, draws the number of
/// +1 outcomes from a binomial over `shots` repetitions (axes sampled in the
/// order x, y, z), estimates each component, then rescales the estimated
/// vector onto the unit ball if the noise pushed it outside.
BlochParams sampled_bloch_params(const StateVector& state, int qubit,
                                 long shots, std::mt19937_64& rng);
BlochParams sampled_bloch_params(const StateVector& state, int qubit,
                                 long shots, std::uint64_t seed);

}  // namespace blochopt::qsim
