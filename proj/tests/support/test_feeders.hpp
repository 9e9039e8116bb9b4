#pragma once

// Shared helpers: bundled data paths, tiny hand-built feeders, and the
// random radial feeder generator used by property tests.

#include <cstdlib>
#include <string>

#include "vvo/feeder_json.hpp"
#include "vvo/network.hpp"
#include "vvo/rng.hpp"

#ifndef VVO_DATA_DIR
#define VVO_DATA_DIR "data"
#endif

namespace vvo::testing {

inline std::string data_path(const std::string& name) {
    if (const char* env = std::getenv("VVO_FEEDER_DIR")) return std::string(env) + "/" + name;
    return std::string(VVO_DATA_DIR) + "/" + name;
}

inline FeederNetwork load_ieee13() { return to_per_unit(parse_feeder(data_path("ieee13.json"))); }
inline FeederNetwork load_ieee123() { return to_per_unit(parse_feeder(data_path("ieee123.json"))); }

// Smallest valid feeder: root, one line, one constant-power load.
inline FeederNetwork two_bus_feeder(Complex z = {0.01, 0.02}, double p = 1.0, double q = 0.0,
                                    PhaseMask mask = PhaseMask::single(Phase::a)) {
    FeederNetwork net;
    net.base_mva = 1.0;
    net.base_kv_ll = 1.0;
    net.per_unit = true;
    net.buses.push_back({"src", mask, 1.0, true});
    net.buses.push_back({"load", mask, 1.0, false});
    BranchElement br;
    br.from = 0;
    br.to = 1;
    br.kind = BranchKind::line;
    br.phases = mask;
    mask.for_each([&](Phase ph) { br.z_series.at(ph, ph) = z; });
    net.branches.push_back(br);
    if (p != 0.0 || q != 0.0) {
        mask.for_each([&](Phase ph) {
            ZipLoad ld;
            ld.bus = 1;
            ld.phase = ph;
            ld.p0 = p;
            ld.q0 = q;
            net.loads.push_back(ld);
        });
    }
    net.finalize();
    return net;
}

// Random radial feeder in per-unit, at most `max_buses` buses, random phase
// masks (child masks are subsets of the parent's), no control devices.
inline FeederNetwork random_radial_feeder(Rng& rng, int max_buses = 10) {
    FeederNetwork net;
    net.base_mva = 1.0;
    net.base_kv_ll = 1.0;
    net.per_unit = true;
    const int n = 2 + rng.index(max_buses - 1);
    net.buses.push_back({"b0", PhaseMask::all(), 1.0, true});
    for (int i = 1; i < n; ++i) {
        const int parent = rng.index(i);
        PhaseMask pmask = net.buses[std::size_t(parent)].phases;
        // non-empty random subset of the parent's mask
        PhaseMask mask;
        do {
            std::uint8_t bits = 0;
            pmask.for_each([&](Phase ph) {
                if (rng.uniform() < 0.7) bits |= std::uint8_t(1u << int(ph));
            });
            mask = PhaseMask(bits);
        } while (mask.empty());
        net.buses.push_back({"b" + std::to_string(i), mask, 1.0, false});

        BranchElement br;
        br.from = parent;
        br.to = i;
        br.kind = BranchKind::line;
        br.phases = mask;
        mask.for_each([&](Phase r) {
            br.z_series.at(r, r) = Complex{rng.uniform(0.01, 0.05), rng.uniform(0.02, 0.08)};
        });
        // weak symmetric coupling keeps the block invertible
        mask.for_each([&](Phase r) {
            mask.for_each([&](Phase c) {
                if (int(r) < int(c)) {
                    const Complex zc{rng.uniform(0.002, 0.008), rng.uniform(0.005, 0.015)};
                    br.z_series.at(r, c) = zc;
                    br.z_series.at(c, r) = zc;
                }
            });
        });
        if (rng.uniform() < 0.5)
            mask.for_each([&](Phase r) { br.y_shunt.at(r, r) = Complex{0.0, rng.uniform(0.0, 2e-3)}; });
        net.branches.push_back(br);

        if (rng.uniform() < 0.8) {
            ZipLoad ld;
            ld.bus = i;
            int k = rng.index(mask.count());
            mask.for_each([&](Phase ph) {
                if (k-- == 0) ld.phase = ph;
            });
            ld.p0 = rng.uniform(0.0, 0.15);
            ld.q0 = rng.uniform(0.0, 0.08);
            const double z_frac = rng.uniform();
            const double i_frac = rng.uniform() * (1.0 - z_frac);
            ld.kp = {z_frac, i_frac, 1.0 - z_frac - i_frac};
            ld.kq = ld.kp;
            net.loads.push_back(ld);
        }
    }
    net.finalize();
    return net;
}

}  // namespace vvo::testing
