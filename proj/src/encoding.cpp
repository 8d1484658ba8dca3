#include "blochopt/encoding.hpp"

#include <cmath>
#include <string>

namespace blochopt::encoding {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

int vars_per_qubit(Mode mode) { return mode == Mode::pure ? 2 : 3; }

int capacity(Mode mode, int n_qubits) {
    return vars_per_qubit(mode) * n_qubits;
}

EncodingMap EncodingMap::make(Mode mode, std::vector<VariableDomain> domains,
                              int n_qubits) {
    const int n_vars = int(domains.size());
    if (n_vars < 1) throw ContractViolation("EncodingMap: no variables");
    for (const auto& d : domains)
        if (!(d.lo < d.hi))
            throw ContractViolation("EncodingMap: domain requires lo < hi");
    const int k = vars_per_qubit(mode);
    if (n_qubits == 0) {
        n_qubits = (n_vars + k - 1) / k;
    } else if (capacity(mode, n_qubits) < n_vars) {
        throw ContractViolation(
            "EncodingMap: " + std::to_string(n_qubits) + " qubits hold at most " +
            std::to_string(capacity(mode, n_qubits)) + " variables, need " +
            std::to_string(n_vars));
    }
    EncodingMap map;
    map.mode = mode;
    map.n_vars = n_vars;
    map.n_qubits = n_qubits;
    map.domains = std::move(domains);
    map.slots.reserve(n_vars);
    for (int i = 0; i < n_vars; ++i) {
        Slot s;
        s.qubit = i / k;
        s.channel = static_cast<Channel>(i % k);
        map.slots.push_back(s);
    }
    return map;
}

double decode_slot(const qsim::BlochParams& bloch, Channel channel,
                   const VariableDomain& domain) {
    double v = 0.0;  // position in [0, 1] along the channel's native range
    switch (channel) {
        case Channel::theta: v = bloch.theta / kPi; break;
        case Channel::phi: v = bloch.phi / (2.0 * kPi); break;
        case Channel::r: v = bloch.r; break;
    }
    v = std::min(1.0, std::max(0.0, v));
    double x = domain.lo + v * (domain.hi - domain.lo);
    if (domain.half_open && x >= domain.hi)
        x = std::nextafter(domain.hi, domain.lo);
    return x;
}

Eigen::VectorXd decode(const std::vector<qsim::BlochParams>& blochs,
                       const EncodingMap& map) {
    if (int(blochs.size()) != map.n_qubits)
        throw ContractViolation("decode: need one Bloch reading per qubit");
    Eigen::VectorXd x(map.n_vars);
    for (int i = 0; i < map.n_vars; ++i) {
        const Slot& s = map.slots[i];
        x[i] = decode_slot(blochs[s.qubit], s.channel, map.domains[i]);
    }
    return x;
}

}  // namespace blochopt::encoding
