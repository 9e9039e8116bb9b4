#include <doctest.h>

#include "support/oracles.hpp"
#include "support/test_feeders.hpp"

using namespace vvo;

namespace {

DeviceSettings neutral_of(const FeederNetwork& net) { return DeviceSettings::neutral(net); }

double nodal_real_power(const FeederNetwork& net, const PowerFlowSolution& sol,
                        const DeviceSettings& settings, const OperatingPoint& op) {
    const auto s = nodal_powers(net, sol.voltages, settings, op);
    double p = 0.0;
    for (std::size_t k = 0; k < net.buses.size(); ++k)
        net.buses[k].phases.for_each([&](Phase ph) { p += s[k][ph].real(); });
    return p;
}

}  // namespace

TEST_CASE("ZIP load evaluation") {
    // constant power is voltage independent
    CHECK(zip_power(1.0, {0.0, 0.0, 1.0}, 0.9) == doctest::Approx(1.0));
    // constant impedance scales with v^2
    CHECK(zip_power(1.0, {1.0, 0.0, 0.0}, 1.2) == doctest::Approx(1.44));
    // constant current scales with v
    CHECK(zip_power(2.0, {0.0, 1.0, 0.0}, 0.95) == doctest::Approx(1.9));
    // mixed: 2 * (0.2*1.1^2 + 0.3*1.1 + 0.5) = 2 * 1.072 = 2.144
    CHECK(zip_power(2.0, {0.2, 0.3, 0.5}, 1.1) == doctest::Approx(2.144));
}

TEST_CASE("injection current of a constant-power load at 1 p.u.") {
    const FeederNetwork net = testing::two_bus_feeder({0.0, 0.0}, 0.3, 0.1);
    // zero-impedance branch keeps the load at the source voltage
    auto u = source_voltages(net, SolverConfig{});
    const auto inj = injection_currents(net, u, neutral_of(net), {});
    // I = conj(S / U) = conj(0.3 + 0.1j) at U = 1
    CHECK(inj[1][Phase::a].real() == doctest::Approx(0.3));
    CHECK(inj[1][Phase::a].imag() == doctest::Approx(-0.1));
}

TEST_CASE("no-load feeder solves to the source voltage everywhere") {
    const FeederNetwork net = testing::two_bus_feeder({0.01, 0.02}, 0.0, 0.0, PhaseMask::all());
    const auto sol = solve(net, neutral_of(net), {}, SolverConfig{});
    REQUIRE(sol.converged());
    CHECK(sol.iterations <= 2);
    for (const auto& u : sol.voltages)
        PhaseMask::all().for_each([&](Phase p) { CHECK(std::abs(u[p]) == doctest::Approx(1.0)); });
    CHECK(sol.total_loss == doctest::Approx(0.0));
}

TEST_CASE("two-bus case matches the closed-form fixed point") {
    const Complex z{0.02, 0.06};
    const Complex s_load{0.8, 0.4};
    const FeederNetwork net = testing::two_bus_feeder(z, s_load.real(), s_load.imag());
    const auto sol = solve(net, neutral_of(net), {}, SolverConfig{1e-12, 200, {1.0, 1.0, 1.0}, 0.2});
    REQUIRE(sol.converged());

    const Complex u_ref = testing::two_bus_voltage_oracle(Complex{1.0, 0.0}, z, s_load);
    CHECK(std::abs(sol.voltages[1][Phase::a] - u_ref) < 1e-8);

    // analytic loss of the single branch
    const Complex i = (Complex{1.0, 0.0} - u_ref) / z;
    const double loss_ref = std::norm(i) * z.real();
    CHECK(sol.total_loss == doctest::Approx(loss_ref).epsilon(1e-7));
}

TEST_CASE("13-bus neutral solve matches the admittance-matrix oracle") {
    const FeederNetwork net = testing::load_ieee13();
    const auto settings = neutral_of(net);
    const SolverConfig cfg{1e-10, 200, {1.0, 1.0, 1.0}, 0.2};
    const auto sol = solve(net, settings, {}, cfg);
    REQUIRE(sol.converged());

    const auto ref = testing::gauss_seidel_oracle(net, settings, {}, cfg);
    REQUIRE(ref.converged);
    double worst = 0.0;
    for (std::size_t k = 0; k < net.buses.size(); ++k)
        net.buses[k].phases.for_each([&](Phase p) {
            worst = std::max(worst, std::abs(sol.voltages[k][p] - ref.voltages[k][p]));
        });
    CHECK(worst < 1e-5);
}

TEST_CASE("123-bus neutral solve converges in band-ish voltages") {
    const FeederNetwork net = testing::load_ieee123();
    const auto sol = solve(net, neutral_of(net), {}, SolverConfig{});
    REQUIRE(sol.converged());
    for (std::size_t k = 0; k < net.buses.size(); ++k)
        net.buses[k].phases.for_each([&](Phase p) {
            const double v = std::abs(sol.voltages[k][p]);
            CHECK(v > 0.85);
            CHECK(v < 1.1);
        });
    CHECK(sol.total_loss_kw > 0.0);
}

TEST_CASE("random radial feeders match the oracle" * doctest::timeout(120)) {
    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        const FeederNetwork net = testing::random_radial_feeder(rng);
        const auto settings = neutral_of(net);
        const SolverConfig cfg{1e-10, 300, {1.0, 1.0, 1.0}, 0.2};
        const auto sol = solve(net, settings, {}, cfg);
        REQUIRE(sol.converged());
        const auto ref = testing::gauss_seidel_oracle(net, settings, {}, cfg);
        REQUIRE(ref.converged);
        for (std::size_t k = 0; k < net.buses.size(); ++k)
            net.buses[k].phases.for_each([&](Phase p) {
                CHECK(std::abs(sol.voltages[k][p] - ref.voltages[k][p]) < 1e-6);
            });
    }
}

TEST_CASE("loss identity: Re(dU conj(I)) equals I^H R I from sweep currents") {
    for (const FeederNetwork& net : {testing::load_ieee13(), testing::load_ieee123()}) {
        const auto d = ActionSpaceDescriptor::build(net);
        Rng rng(99);
        for (int trial = 0; trial < 5; ++trial) {
            JointAction a(std::size_t(d.size()));
            for (int i = 0; i < d.size(); ++i) {
                // stay near neutral so the random action keeps the solve stable
                if (d.slots[i].kind == SlotKind::regulator)
                    a[std::size_t(i)] = kRegulatorNeutralTap - 1 + rng.index(9) - 4;
                else
                    a[std::size_t(i)] = rng.index(d.slots[i].cardinality);
            }
            const auto settings = decode_action(d, net, a);
            const SolverConfig cfg{1e-12, 400, {1.0, 1.0, 1.0}, 0.2};
            const auto sol = solve(net, settings, {}, cfg);
            REQUIRE(sol.converged());
            const double ref = testing::series_loss_oracle(net, sol, settings);
            CHECK(sol.total_loss == doctest::Approx(ref).epsilon(1e-9));
        }
    }
}

TEST_CASE("active power balance under random device actions") {
    for (const FeederNetwork& net : {testing::load_ieee13(), testing::load_ieee123()}) {
        const auto d = ActionSpaceDescriptor::build(net);
        Rng rng(7);
        for (int trial = 0; trial < 5; ++trial) {
            JointAction a(std::size_t(d.size()));
            for (int i = 0; i < d.size(); ++i) {
                if (d.slots[i].kind == SlotKind::regulator)
                    a[std::size_t(i)] = kRegulatorNeutralTap - 1 + rng.index(9) - 4;
                else
                    a[std::size_t(i)] = rng.index(d.slots[i].cardinality);
            }
            const auto settings = decode_action(d, net, a);
            const SolverConfig cfg{1e-12, 400, {1.0, 1.0, 1.0}, 0.2};
            const auto sol = solve(net, settings, {}, cfg);
            REQUIRE(sol.converged());
            const double p_src = source_power(net, sol);
            const double p_consumed = nodal_real_power(net, sol, settings, {});
            CHECK(p_src == doctest::Approx(p_consumed + sol.total_loss).epsilon(1e-6));
        }
    }
}

TEST_CASE("neutral settings are equivalent to the devices being absent") {
    FeederNetwork net = testing::load_ieee13();
    const auto with_devices = solve(net, neutral_of(net), {}, SolverConfig{});
    REQUIRE(with_devices.converged());

    // Neutral means caps off, ratio 1, inverter Q 0; DG active power is part
    // of the operating point, so DG units stay.
    FeederNetwork stripped_with_dg = net;
    stripped_with_dg.capacitors.clear();
    stripped_with_dg.regulators.clear();
    stripped_with_dg.finalize();
    const auto plain = solve(stripped_with_dg, DeviceSettings::neutral(stripped_with_dg), {},
                             SolverConfig{});
    REQUIRE(plain.converged());
    for (std::size_t k = 0; k < net.buses.size(); ++k)
        net.buses[k].phases.for_each([&](Phase p) {
            CHECK(std::abs(with_devices.voltages[k][p] - plain.voltages[k][p]) < 1e-9);
        });
}

TEST_CASE("raising the regulator tap raises downstream voltage") {
    const FeederNetwork net = testing::load_ieee13();
    const auto d = ActionSpaceDescriptor::build(net);
    JointAction lo = neutral_action(d, net), hi = lo;
    for (int i = 0; i < d.size(); ++i)
        if (d.slots[i].kind == SlotKind::regulator) {
            lo[std::size_t(i)] = 8;   // tap 9, ratio 0.95
            hi[std::size_t(i)] = 24;  // tap 25, ratio 1.05
        }
    const auto sol_lo = solve(net, decode_action(d, net, lo), {}, SolverConfig{});
    const auto sol_hi = solve(net, decode_action(d, net, hi), {}, SolverConfig{});
    REQUIRE(sol_lo.converged());
    REQUIRE(sol_hi.converged());
    const int end = net.bus_index("675");
    net.buses[std::size_t(end)].phases.for_each([&](Phase p) {
        CHECK(std::abs(sol_hi.voltages[std::size_t(end)][p]) >
              std::abs(sol_lo.voltages[std::size_t(end)][p]));
    });
}

TEST_CASE("convergence history shrinks below tolerance") {
    const FeederNetwork net = testing::load_ieee13();
    const auto sol = solve(net, neutral_of(net), {}, SolverConfig{});
    REQUIRE(sol.converged());
    REQUIRE(!sol.delta_history.empty());
    CHECK(sol.delta_history.back() < 1e-6);
    CHECK(sol.iterations < 100);
    // loose monotonicity: the last delta is the smallest
    for (double d : sol.delta_history) CHECK(sol.delta_history.back() <= d + 1e-15);
}

TEST_CASE("heavy overload is reported as divergence, not garbage") {
    const FeederNetwork net = testing::two_bus_feeder({0.05, 0.1}, 50.0, 20.0);
    const auto sol = solve(net, neutral_of(net), {}, SolverConfig{});
    CHECK(sol.status == SolveStatus::diverged);
}

TEST_CASE("solve refuses a network that is not per-unit") {
    FeederNetwork net = testing::two_bus_feeder();
    net.per_unit = false;
    CHECK_THROWS_AS(solve(net, neutral_of(net), {}, SolverConfig{}), Error);
}
