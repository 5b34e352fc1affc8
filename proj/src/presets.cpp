#include "tlsnl/presets.hpp"

#include "tlsnl/errors.hpp"

namespace tlsnl {

Preset preset_fig2() {
    Preset p;
    p.name = "fig2";
    p.description = "520.8 MHz mode with a discrete strongly coupled TLS";
    ModelParams& m = p.model;
    m.res = {520.808275e6, 69.9, 60e6};
    m.tls = {1.42e-5, 1.61e-5, 94.2, 1.0, 0.33e6, 1.69};
    m.th.t0 = 0.025;
    m.th.n_ch = 0.37;
    m.th.gamma = 2.83;
    m.disc = DiscreteTlsParams{546e6, 230e3};
    return p;
}

Preset preset_fig3() {
    Preset p;
    p.name = "fig3";
    p.description = "502.1 MHz mode used for the power and frequency sweeps";
    ModelParams& m = p.model;
    m.res = {502.06550e6, 42.1, 60e6};
    m.tls = {1.14e-5, 1.23e-5, 128.0, 1.0, 0.36e6, 1.84};
    m.th.t0 = 0.025;
    m.th.n_ch = 0.58;
    m.th.gamma = 2.83;
    return p;
}

Preset preset_s4() {
    Preset p;
    p.name = "s4";
    p.description = "single loss tangent set without background loss";
    ModelParams& m = p.model;
    m.res = {502.06550e6, 42.15, kInf};
    m.tls = {1.1395e-5, 1.1395e-5, 128.0, 1.0, 0.36e6, 1.84};
    m.th.t0 = 0.025;
    m.th.n_ch = 0.58;
    m.th.gamma = 2.83;
    return p;
}

Preset preset_s2() {
    Preset p;
    p.name = "s2";
    p.description = "hole-burning estimate with uniform coupling g and n_s = 100";
    ModelParams& m = p.model;
    m.res = {500e6, 70.0, 60e6};
    m.tls = {1.42e-5, 1.42e-5, 100.0, 1.0, kInf, 1.0};
    m.th.t0 = 0.025;
    m.th.n_ch = 0.37;
    m.th.gamma = 2.83;
    m.disc = DiscreteTlsParams{546e6, 230e3};
    return p;
}

std::vector<Preset> all_presets() { return {preset_fig2(), preset_fig3(), preset_s4(), preset_s2()}; }

Preset preset_by_name(const std::string& name) {
    for (const Preset& p : all_presets())
        if (p.name == name) return p;
    throw ValidationError("unknown preset: " + name);
}

}  // namespace tlsnl
