#include "blochopt/qsim.hpp"

#include <cmath>
#include <complex>

namespace blochopt::qsim {

namespace {

using cd = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

Eigen::Matrix2cd rotation_matrix(GateKind kind, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    Eigen::Matrix2cd u;
    switch (kind) {
        case GateKind::RX:
            u << cd(c, 0), cd(0, -s), cd(0, -s), cd(c, 0);
            break;
        case GateKind::RY:
            u << cd(c, 0), cd(-s, 0), cd(s, 0), cd(c, 0);
            break;
        case GateKind::RZ:
            u << std::exp(cd(0, -angle / 2.0)), cd(0, 0), cd(0, 0),
                std::exp(cd(0, angle / 2.0));
            break;
        case GateKind::H: {
            const double h = 1.0 / std::sqrt(2.0);
            u << cd(h, 0), cd(h, 0), cd(h, 0), cd(-h, 0);
            break;
        }
        default:
            throw ContractViolation("rotation_matrix: not a single-qubit gate");
    }
    return u;
}

}  // namespace

StateVector StateVector::zero_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 26)
        throw ContractViolation("zero_state: n_qubits must be in [1, 26]");
    StateVector s;
    s.n_qubits = n_qubits;
    s.amps = Eigen::VectorXcd::Zero(std::int64_t(1) << n_qubits);
    s.amps[0] = cd(1, 0);
    return s;
}

Ansatz layered_ansatz(int n_qubits, int layers) {
    if (n_qubits < 1) throw ContractViolation("layered_ansatz: n_qubits < 1");
    if (layers < 1) throw ContractViolation("layered_ansatz: layers < 1");
    Ansatz a;
    a.n_qubits = n_qubits;
    a.layers = layers;
    a.n_params = 2 * n_qubits * layers;
    for (int layer = 0; layer < layers; ++layer) {
        for (int q = 0; q < n_qubits; ++q) {
            const int base = 2 * (layer * n_qubits + q);
            a.ops.push_back({GateKind::RY, q, -1, base});
            a.ops.push_back({GateKind::RZ, q, -1, base + 1});
        }
        for (int q = 0; q + 1 < n_qubits; ++q)
            a.ops.push_back({GateKind::CNOT, q + 1, q, -1});
    }
    return a;
}

void apply_gate(StateVector& state, const GateOp& op, double angle) {
    const int n = state.n_qubits;
    if (op.target < 0 || op.target >= n)
        throw ContractViolation("apply_gate: target out of range");
    auto& amps = state.amps;
    const std::int64_t dim = amps.size();

    if (op.kind == GateKind::CNOT) {
        if (op.control < 0 || op.control >= n || op.control == op.target)
            throw ContractViolation("apply_gate: bad CNOT wiring");
        const std::int64_t cmask = std::int64_t(1) << op.control;
        const std::int64_t tmask = std::int64_t(1) << op.target;
        for (std::int64_t i = 0; i < dim; ++i)
            if ((i & cmask) && !(i & tmask)) std::swap(amps[i], amps[i | tmask]);
        return;
    }

    const Eigen::Matrix2cd u = rotation_matrix(op.kind, angle);
    const std::int64_t tmask = std::int64_t(1) << op.target;
    const std::int64_t lo_mask = tmask - 1;
    const std::int64_t half = dim >> 1;
    for (std::int64_t k = 0; k < half; ++k) {
        const std::int64_t i0 = ((k & ~lo_mask) << 1) | (k & lo_mask);
        const std::int64_t i1 = i0 | tmask;
        const cd a0 = amps[i0];
        const cd a1 = amps[i1];
        amps[i0] = u(0, 0) * a0 + u(0, 1) * a1;
        amps[i1] = u(1, 0) * a0 + u(1, 1) * a1;
    }
}

StateVector apply_circuit(const StateVector& state, const Ansatz& ansatz,
                          const Eigen::VectorXd& omega) {
    if (state.n_qubits != ansatz.n_qubits)
        throw ContractViolation("apply_circuit: register width mismatch");
    if (omega.size() != ansatz.n_params)
        throw ContractViolation("apply_circuit: omega size mismatch");
    StateVector out = state;
    for (const GateOp& op : ansatz.ops) {
        const double angle = op.param_slot >= 0 ? omega[op.param_slot] : 0.0;
        apply_gate(out, op, angle);
    }
    return out;
}

Eigen::Matrix2cd reduced_density_matrix(const StateVector& state, int qubit) {
    const int n = state.n_qubits;
    if (qubit < 0 || qubit >= n)
        throw ContractViolation("reduced_density_matrix: qubit out of range");
    const auto& amps = state.amps;
    const std::int64_t tmask = std::int64_t(1) << qubit;
    const std::int64_t lo_mask = tmask - 1;
    const std::int64_t half = amps.size() >> 1;
    cd r00(0, 0), r01(0, 0), r11(0, 0);
    for (std::int64_t k = 0; k < half; ++k) {
        const std::int64_t i0 = ((k & ~lo_mask) << 1) | (k & lo_mask);
        const std::int64_t i1 = i0 | tmask;
        r00 += amps[i0] * std::conj(amps[i0]);
        r11 += amps[i1] * std::conj(amps[i1]);
        r01 += amps[i0] * std::conj(amps[i1]);
    }
    Eigen::Matrix2cd rho;
    rho << r00, r01, std::conj(r01), r11;
    return rho;
}

BlochParams bloch_params(const Eigen::Matrix2cd& rho) {
    const double trace = rho(0, 0).real() + rho(1, 1).real();
    if (std::abs(trace - 1.0) > 1e-9)
        throw ContractViolation("bloch_params: density matrix trace is not 1");
    const double nx = 2.0 * rho(0, 1).real();
    const double ny = -2.0 * rho(0, 1).imag();
    const double nz = rho(0, 0).real() - rho(1, 1).real();
    const double r = std::sqrt(nx * nx + ny * ny + nz * nz);
    BlochParams b;
    if (r < 1e-12) return b;
    b.r = r;
    b.theta = std::atan2(std::hypot(nx, ny), nz);
    double phi = std::atan2(ny, nx);
    if (phi < 0.0) phi += 2.0 * kPi;
    if (phi >= 2.0 * kPi) phi = 0.0;
    b.phi = phi;
    return b;
}

BlochParams exact_bloch_params(const StateVector& state, int qubit) {
    return bloch_params(reduced_density_matrix(state, qubit));
}

BlochParams sampled_bloch_params(const StateVector& state, int qubit,
                                 long shots, std::mt19937_64& rng) {
    if (shots < 1) throw ContractViolation("sampled_bloch_params: shots < 1");
    const Eigen::Matrix2cd rho = reduced_density_matrix(state, qubit);
    const double exact[3] = {2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(),
                             rho(0, 0).real() - rho(1, 1).real()};
    double est[3];
    for (int axis = 0; axis < 3; ++axis) {
        double p = 0.5 * (1.0 + exact[axis]);
        p = std::min(1.0, std::max(0.0, p));
        std::binomial_distribution<long> dist(shots, p);
        const long ups = dist(rng);
        est[axis] = 2.0 * double(ups) / double(shots) - 1.0;
    }
    double norm = std::sqrt(est[0] * est[0] + est[1] * est[1] + est[2] * est[2]);
    if (norm > 1.0)
        for (double& v : est) v /= norm;

    Eigen::Matrix2cd rho_est;
    rho_est << cd(0.5 * (1.0 + est[2]), 0), cd(0.5 * est[0], -0.5 * est[1]),
        cd(0.5 * est[0], 0.5 * est[1]), cd(0.5 * (1.0 - est[2]), 0);
    return bloch_params(rho_est);
}

BlochParams sampled_bloch_params(const StateVector& state, int qubit,
                                 long shots, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sampled_bloch_params(state, qubit, shots, rng);
}

}  // namespace blochopt::qsim
