#include <doctest.h>

#include <cmath>

#include "blochopt/encoding.hpp"
#include "blochopt/errors.hpp"

using namespace blochopt;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("capacity per mode") {
    CHECK(encoding::vars_per_qubit(encoding::Mode::pure) == 2);
    CHECK(encoding::vars_per_qubit(encoding::Mode::mixed) == 3);
    CHECK(encoding::capacity(encoding::Mode::pure, 7) == 14);
    CHECK(encoding::capacity(encoding::Mode::mixed, 127) == 381);
}

TEST_CASE("register width derives from the variable count") {
    std::vector<encoding::VariableDomain> d14(14, {0.0, 1.0, false});
    const auto pure = encoding::EncodingMap::make(encoding::Mode::pure, d14);
    CHECK(pure.n_qubits == 7);

    std::vector<encoding::VariableDomain> d7(7, {0.0, 1.0, false});
    const auto mixed = encoding::EncodingMap::make(encoding::Mode::mixed, d7);
    CHECK(mixed.n_qubits == 3);

    // Odd counts round up and leave spare channels.
    std::vector<encoding::VariableDomain> d5(5, {0.0, 1.0, false});
    CHECK(encoding::EncodingMap::make(encoding::Mode::pure, d5).n_qubits == 3);
}

TEST_CASE("explicit register width is honored or rejected") {
    std::vector<encoding::VariableDomain> d4(4, {0.0, 1.0, false});
    const auto wide = encoding::EncodingMap::make(encoding::Mode::pure, d4, 5);
    CHECK(wide.n_qubits == 5);
    CHECK_THROWS_AS(encoding::EncodingMap::make(encoding::Mode::pure, d4, 1),
                    ContractViolation);
}

TEST_CASE("variable-major slot assignment") {
    std::vector<encoding::VariableDomain> d5(5, {0.0, 1.0, false});
    const auto map = encoding::EncodingMap::make(encoding::Mode::mixed, d5);
    REQUIRE(map.slots.size() == 5);
    CHECK(map.slots[0].qubit == 0);
    CHECK(map.slots[0].channel == encoding::Channel::theta);
    CHECK(map.slots[1].qubit == 0);
    CHECK(map.slots[1].channel == encoding::Channel::phi);
    CHECK(map.slots[2].qubit == 0);
    CHECK(map.slots[2].channel == encoding::Channel::r);
    CHECK(map.slots[3].qubit == 1);
    CHECK(map.slots[3].channel == encoding::Channel::theta);
    CHECK(map.slots[4].qubit == 1);
    CHECK(map.slots[4].channel == encoding::Channel::phi);
}

TEST_CASE("affine decode from native channel ranges") {
    const encoding::VariableDomain dom{-2.0, 6.0, false};
    qsim::BlochParams b;
    b.theta = kPi / 2.0;  // halfway through [0, pi]
    b.phi = kPi;          // halfway through [0, 2 pi)
    b.r = 0.25;           // quarter through [0, 1)
    CHECK(encoding::decode_slot(b, encoding::Channel::theta, dom) ==
          doctest::Approx(2.0));
    CHECK(encoding::decode_slot(b, encoding::Channel::phi, dom) ==
          doctest::Approx(2.0));
    CHECK(encoding::decode_slot(b, encoding::Channel::r, dom) ==
          doctest::Approx(0.0));

    qsim::BlochParams ends;
    ends.theta = 0.0;
    CHECK(encoding::decode_slot(ends, encoding::Channel::theta, dom) == -2.0);
    ends.theta = kPi;
    CHECK(encoding::decode_slot(ends, encoding::Channel::theta, dom) == 6.0);
}

TEST_CASE("half-open domains never produce the upper endpoint") {
    const encoding::VariableDomain dom{0.0, 2.0 * kPi, true};
    qsim::BlochParams b;
    b.theta = kPi;  // decodes to the closed upper endpoint
    const double x = encoding::decode_slot(b, encoding::Channel::theta, dom);
    CHECK(x < dom.hi);
    CHECK(x == doctest::Approx(dom.hi));
}

TEST_CASE("decode assembles the variable vector from per-qubit readings") {
    std::vector<encoding::VariableDomain> doms = {
        {0.0, 1.0, false}, {0.0, 1.0, false}, {10.0, 20.0, false}};
    const auto map = encoding::EncodingMap::make(encoding::Mode::pure, doms);
    REQUIRE(map.n_qubits == 2);

    std::vector<qsim::BlochParams> blochs(2);
    blochs[0].theta = kPi / 4.0;
    blochs[0].phi = kPi / 2.0;
    blochs[1].theta = kPi / 2.0;
    const Eigen::VectorXd x = encoding::decode(blochs, map);
    REQUIRE(x.size() == 3);
    CHECK(x[0] == doctest::Approx(0.25));
    CHECK(x[1] == doctest::Approx(0.25));
    CHECK(x[2] == doctest::Approx(15.0));

    std::vector<qsim::BlochParams> wrong(3);
    CHECK_THROWS_AS(encoding::decode(wrong, map), ContractViolation);
}
