#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

#include <stdexcept>

#include <doctest.h>

#include "pqbench/rng.hpp"
#include "pqbench/synth.hpp"

using namespace pqbench;
using namespace pqbench::synth;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Independent phasor oracle for the balanced healthy circuit. With unit
// perturbation the wye point carries no current, so each phase reduces to
// a single series-parallel complex impedance.
struct PhasorOracle {
    std::complex<double> source_current;  // phase A phasor (peak convention)
    double source_power;                  // three-phase mean power
    double dissipated_power;
};

PhasorOracle balanced_oracle(const CircuitConfig& cfg, const SynthParams& p) {
    using cd = std::complex<double>;
    const double w = kTwoPi * cfg.system_frequency;
    const cd jw(0.0, w);
    const double vm = cfg.nominal_voltage_ll * std::sqrt(2.0 / 3.0);
    const double f = p.fault_location_fraction;
    const cd e(vm, 0.0);
    const cd zs = cd(cfg.source_resistance + f * cfg.line_resistance) +
                  jw * (cfg.source_inductance + f * cfg.line_inductance);
    const cd z2 = cd((1.0 - f) * cfg.line_resistance) +
                  jw * ((1.0 - f) * cfg.line_inductance);
    const cd zload = cd(p.load_resistance) + jw * p.load_inductance;
    const cd ycap = jw * p.load_capacitance;
    const cd zp = 1.0 / (1.0 / zload + ycap);
    const cd is = e / (zs + z2 + zp);
    const cd vbm = is * zp;
    const cd iload = vbm / zload;

    PhasorOracle out;
    out.source_current = is;
    out.source_power = 3.0 * 0.5 * (e * std::conj(is)).real();
    const double i2 = std::norm(is);
    out.dissipated_power =
        3.0 * 0.5 *
        (i2 * (cfg.source_resistance + cfg.line_resistance) +
         std::norm(iload) * p.load_resistance);
    return out;
}

SynthParams fixed_params() {
    SynthParams p;
    p.event_time = 0.05;
    p.phase_fault_resistance = 0.5;
    p.ground_resistance = 0.5;
    p.fault_location_fraction = 0.5;
    p.breaker_delay = 0.09;
    p.load_resistance = 1000.0;
    p.load_inductance = 1.0;
    p.load_capacitance = 2e-6;
    p.load_perturbation = {1.01, 0.99, 1.005};
    return p;
}

double rms(const std::vector<double>& x, int begin, int end) {
    double s = 0.0;
    for (int i = begin; i < end; ++i) s += x[i] * x[i];
    return std::sqrt(s / (end - begin));
}

double maxabs(const std::vector<double>& x, int begin, int end) {
    double m = 0.0;
    for (int i = begin; i < end; ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

// RMS of the instantaneous phase-current sum over a sample window
double zero_sequence_rms(const WaveformRecord& rec, int begin, int end) {
    double s = 0.0;
    for (int i = begin; i < end; ++i) {
        const double sum =
            rec.samples[3][i] + rec.samples[4][i] + rec.samples[5][i];
        s += sum * sum;
    }
    return std::sqrt(s / (end - begin));
}

bool records_identical(const WaveformRecord& a, const WaveformRecord& b) {
    if (a.label != b.label) return false;
    for (int ch = 0; ch < kNumChannels; ++ch) {
        for (int i = 0; i < kSamplesPerChannel; ++i) {
            if (a.samples[ch][i] != b.samples[ch][i]) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("event taxonomy") {
    CHECK(kNumClasses == 13);
    const auto& names = class_names();
    CHECK(names[0] == "AG");
    CHECK(names[10] == "ABC");
    CHECK(names[11] == "LINE_ENERGIZE");
    CHECK(names[12] == "LINE_DEENERGIZE");
    for (int code = 0; code < kNumClasses; ++code) {
        CHECK(class_code(class_from_code(code)) == code);
        CHECK(class_from_name(names[code]) == class_from_code(code));
    }
    CHECK_THROWS_AS(class_from_code(13), std::invalid_argument);
    CHECK_THROWS_AS(class_from_name("XYZ"), std::invalid_argument);

    SUBCASE("fault_topology examples") {
        const FaultSpec ag = fault_topology(EventClass::AG);
        CHECK(ag.phase_a);
        CHECK_FALSE(ag.phase_b);
        CHECK_FALSE(ag.phase_c);
        CHECK(ag.grounded);

        const FaultSpec bc = fault_topology(EventClass::BC);
        CHECK_FALSE(bc.phase_a);
        CHECK(bc.phase_b);
        CHECK(bc.phase_c);
        CHECK_FALSE(bc.grounded);

        const FaultSpec abcg = fault_topology(EventClass::ABCG);
        CHECK(abcg.phase_a);
        CHECK(abcg.phase_b);
        CHECK(abcg.phase_c);
        CHECK(abcg.grounded);

        const FaultSpec sw = fault_topology(EventClass::LINE_ENERGIZE);
        CHECK(sw.phase_count() == 0);
        CHECK_FALSE(sw.grounded);
    }
}

TEST_CASE("sample_params determinism and ranges") {
    const SynthParams a = sample_params(EventClass::AG, 42, 0);
    const SynthParams b = sample_params(EventClass::AG, 42, 0);
    CHECK(a.event_time == b.event_time);
    CHECK(a.phase_fault_resistance == b.phase_fault_resistance);
    CHECK(a.ground_resistance == b.ground_resistance);
    CHECK(a.fault_location_fraction == b.fault_location_fraction);
    CHECK(a.breaker_delay == b.breaker_delay);
    CHECK(a.load_resistance == b.load_resistance);
    CHECK(a.load_inductance == b.load_inductance);
    CHECK(a.load_capacitance == b.load_capacitance);
    CHECK(a.load_perturbation == b.load_perturbation);

    const SynthParams c = sample_params(EventClass::AG, 42, 1);
    CHECK(a.event_time != c.event_time);

    const ParamRanges r;
    for (int idx = 0; idx < 50; ++idx) {
        for (int code = 0; code < kNumClasses; ++code) {
            const SynthParams p =
                sample_params(class_from_code(code), 7, idx);
            CHECK(p.event_time >= r.event_time_lo);
            CHECK(p.event_time < r.event_time_hi);
            CHECK(p.phase_fault_resistance >= r.fault_resistance_lo);
            CHECK(p.phase_fault_resistance < r.fault_resistance_hi);
            CHECK(p.fault_location_fraction >= r.location_lo);
            CHECK(p.fault_location_fraction < r.location_hi);
            CHECK(p.breaker_delay >= r.breaker_delay_lo);
            CHECK(p.breaker_delay < r.breaker_delay_hi);
            CHECK(p.load_resistance >= r.load_r_lo);
            CHECK(p.load_resistance < r.load_r_hi);
            CHECK(p.load_inductance >= r.load_l_lo);
            CHECK(p.load_inductance < r.load_l_hi);
            CHECK(p.load_capacitance >= r.load_c_lo);
            CHECK(p.load_capacitance < r.load_c_hi);
            for (double k : p.load_perturbation) {
                CHECK(k >= r.perturb_lo);
                CHECK(k < r.perturb_hi);
            }
            CHECK(p.event_time + p.breaker_delay < 0.25);
        }
    }
}

TEST_CASE("TrapRL DC step matches the closed-form exponential") {
    // R-L branch suddenly connected across a DC source V:
    // i(t) = (V/R)(1 - exp(-R t / L))
    const double r = 2.0, l = 0.1, v = 10.0, dt = 1.0 / 4000.0;
    TrapRL br;
    br.prepare(r, l, dt);
    for (int n = 1; n <= 100; ++n) {
        br.advance(v);
        const double t = n * dt;
        const double exact = (v / r) * (1.0 - std::exp(-r * t / l));
        if (n == 100) {
            CHECK(std::abs(br.i - exact) <= 0.01 * std::abs(exact));
        }
    }

    SUBCASE("zero drive keeps zero state") {
        TrapRL z;
        z.prepare(r, l, dt);
        for (int n = 0; n < 50; ++n) {
            z.advance(0.0);
            CHECK(z.i == 0.0);
        }
    }
}

TEST_CASE("solve_dense on a known system") {
    // 2x + y = 5 ; x + 3y = 10  ->  x = 1, y = 3
    const auto x = solve_dense({2.0, 1.0, 1.0, 3.0}, {5.0, 10.0}, 2);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS_AS(solve_dense({1.0, 2.0, 2.0, 4.0}, {1.0, 1.0}, 2),
                    std::runtime_error);
}

TEST_CASE("healthy circuit matches the independent phasor oracle") {
    CircuitConfig cfg;
    SynthParams p = fixed_params();
    p.load_perturbation = {1.0, 1.0, 1.0};
    p.event_time = 0.15;
    p.breaker_delay = 0.05;

    const PhasorOracle oracle = balanced_oracle(cfg, p);
    const WaveformRecord rec = simulate(cfg, EventClass::LINE_DEENERGIZE, p);

    SUBCASE("first-cycle RMS of Ia within 0.5% of the phasor magnitude") {
        const double sim_rms = rms(rec.samples[3], 0, 80);
        const double oracle_rms = std::abs(oracle.source_current) / std::sqrt(2.0);
        CHECK(std::abs(sim_rms - oracle_rms) <= 0.005 * oracle_rms);
    }

    SUBCASE("balanced phases have equal magnitude") {
        const double ra = rms(rec.samples[3], 0, 80);
        const double rb = rms(rec.samples[4], 0, 80);
        const double rc = rms(rec.samples[5], 0, 80);
        CHECK(std::abs(rb - ra) <= 0.005 * ra);
        CHECK(std::abs(rc - ra) <= 0.005 * ra);
    }

    SUBCASE("energy audit: source power equals dissipated power within 1%") {
        // phasor-side audit
        CHECK(std::abs(oracle.source_power - oracle.dissipated_power) <=
              0.01 * oracle.source_power);
        // simulated source power over one steady cycle
        const double vm = cfg.nominal_voltage_ll * std::sqrt(2.0 / 3.0);
        const double w = kTwoPi * cfg.system_frequency;
        const double dt = 1.0 / cfg.sample_rate;
        static const double angles[3] = {0.0, -kTwoPi / 3.0, kTwoPi / 3.0};
        double mean_power = 0.0;
        for (int k = 80; k < 160; ++k) {
            const double t = k * dt;
            for (int ph = 0; ph < 3; ++ph) {
                mean_power +=
                    vm * std::cos(w * t + angles[ph]) * rec.samples[3 + ph][k];
            }
        }
        mean_power /= 80.0;
        CHECK(std::abs(mean_power - oracle.source_power) <=
              0.01 * oracle.source_power);
    }
}

TEST_CASE("simulate shape and validation") {
    CircuitConfig cfg;
    const WaveformRecord rec =
        simulate(cfg, EventClass::AG, fixed_params());
    for (const auto& ch : rec.samples) {
        REQUIRE(static_cast<int>(ch.size()) == 1000);
        for (double v : ch) REQUIRE(std::isfinite(v));
    }

    SynthParams bad = fixed_params();
    bad.event_time = 0.2;
    bad.breaker_delay = 0.09;  // event + delay past the record end
    CHECK_THROWS_AS(simulate(cfg, EventClass::AG, bad), std::invalid_argument);

    SynthParams bad2 = fixed_params();
    bad2.fault_location_fraction = 1.5;
    CHECK_THROWS_AS(simulate(cfg, EventClass::AG, bad2), std::invalid_argument);
}

TEST_CASE("LINE_DEENERGIZE interrupts all phases at zero crossings") {
    CircuitConfig cfg;
    SynthParams p = fixed_params();
    p.event_time = 0.08;
    const WaveformRecord rec = simulate(cfg, EventClass::LINE_DEENERGIZE, p);
    const int event_sample = static_cast<int>(p.event_time * cfg.sample_rate);
    const int settle = event_sample + 120;  // 1.5 cycles
    for (int ph = 0; ph < 3; ++ph) {
        const double pre_peak = maxabs(rec.samples[3 + ph], 0, event_sample);
        const double post = maxabs(rec.samples[3 + ph], settle, 1000);
        CHECK(post <= 0.001 * pre_peak);
    }
}

TEST_CASE("LINE_ENERGIZE starts de-energized") {
    CircuitConfig cfg;
    SynthParams p = fixed_params();
    p.event_time = 0.06;
    const WaveformRecord rec = simulate(cfg, EventClass::LINE_ENERGIZE, p);
    const int event_sample = static_cast<int>(p.event_time * cfg.sample_rate);
    for (int ph = 0; ph < 3; ++ph) {
        for (int k = 0; k < event_sample - 1; ++k) {
            CHECK(rec.samples[3 + ph][k] == 0.0);
        }
        // after closing, load current flows
        CHECK(rms(rec.samples[3 + ph], event_sample + 80, 1000) > 1.0);
    }
}

TEST_CASE("bolted AG fault raises Ia and spares the healthy phases") {
    CircuitConfig cfg;
    SynthParams p = fixed_params();
    p.phase_fault_resistance = 0.001;
    p.ground_resistance = 0.001;
    const WaveformRecord rec = simulate(cfg, EventClass::AG, p);
    const int ev = static_cast<int>(p.event_time * cfg.sample_rate);
    const int trip =
        static_cast<int>((p.event_time + p.breaker_delay) * cfg.sample_rate);
    const double pre_peak_a = maxabs(rec.samples[3], 0, ev);
    const double fault_peak_a = maxabs(rec.samples[3], ev, trip);
    CHECK(fault_peak_a >= 3.0 * pre_peak_a);
    // The healthy phases see the wye-point shift and the lightly damped
    // source-inductance / load-capacitance ring it excites, so their peaks
    // can grow by up to about 2x, but they must stay far below the faulted
    // phase and must not collapse.
    for (int ph = 1; ph < 3; ++ph) {
        const double pre = maxabs(rec.samples[3 + ph], 0, ev);
        const double dur = maxabs(rec.samples[3 + ph], ev + 20, trip);
        CHECK(dur >= 0.4 * pre);
        CHECK(dur <= 2.5 * pre);
        CHECK(fault_peak_a >= 3.0 * dur);
    }
}

TEST_CASE("ground-current signatures") {
    CircuitConfig cfg;
    const SynthParams p = fixed_params();
    const int ev = static_cast<int>(p.event_time * cfg.sample_rate);
    const int trip =
        static_cast<int>((p.event_time + p.breaker_delay) * cfg.sample_rate);
    const int lo = ev + 20, hi = trip - 10;  // interior of the fault window

    const WaveformRecord ag = simulate(cfg, EventClass::AG, p);
    const WaveformRecord abcg = simulate(cfg, EventClass::ABCG, p);
    const WaveformRecord abc = simulate(cfg, EventClass::ABC, p);
    const WaveformRecord ab = simulate(cfg, EventClass::AB, p);

    const double z_ag = zero_sequence_rms(ag, lo, hi);
    const double z_abcg = zero_sequence_rms(abcg, lo, hi);
    const double z_abc = zero_sequence_rms(abc, lo, hi);
    const double z_ab = zero_sequence_rms(ab, lo, hi);

    // ABCG: nonzero (load-perturbation driven) but at least 10x below AG
    CHECK(z_abcg > 1e-3);
    CHECK(z_ag >= 10.0 * z_abcg);

    // ungrounded faults: sum below 0.1% of the peak phase current
    for (const WaveformRecord* rec : {&abc, &ab}) {
        double peak = 0.0;
        for (int ph = 0; ph < 3; ++ph) {
            peak = std::max(peak, maxabs(rec->samples[3 + ph], lo, hi));
        }
        CHECK(zero_sequence_rms(*rec, lo, hi) < 0.001 * peak);
    }
}

TEST_CASE("class-phase consistency for low-resistance faults") {
    CircuitConfig cfg;
    SynthParams p = fixed_params();
    p.phase_fault_resistance = 1.0;
    p.ground_resistance = 1.0;
    const int ev = static_cast<int>(p.event_time * cfg.sample_rate);
    const int trip =
        static_cast<int>((p.event_time + p.breaker_delay) * cfg.sample_rate);

    const EventClass cases[] = {EventClass::AG, EventClass::BG,
                                EventClass::CG, EventClass::ABG,
                                EventClass::BC, EventClass::AB};
    for (EventClass c : cases) {
        const FaultSpec spec = fault_topology(c);
        const WaveformRecord rec = simulate(cfg, c, p);
        double min_faulted = 1e300, max_healthy = 0.0;
        for (int ph = 0; ph < 3; ++ph) {
            const double r = rms(rec.samples[3 + ph], ev + 10, trip);
            if (spec.involves(ph)) {
                min_faulted = std::min(min_faulted, r);
            } else {
                max_healthy = std::max(max_healthy, r);
            }
        }
        CHECK(min_faulted >= 2.0 * max_healthy);
    }
}

TEST_CASE("pre-event purity: fundamental carries at least 99% of energy") {
    CircuitConfig cfg;
    for (int code = 0; code < kNumClasses; ++code) {
        const EventClass c = class_from_code(code);
        const WaveformRecord rec = generate_record(cfg, c, 42, 0, code);
        if (c == EventClass::LINE_ENERGIZE) continue;  // currents are zero
        // exactly two cycles, always inside the pre-event window
        // (event_time >= 0.04 s = 160 samples)
        const std::size_t window = 160;
        for (int ch = 0; ch < kNumChannels; ++ch) {
            double total = 0.0;
            for (std::size_t i = 0; i < window; ++i) {
                total += rec.samples[ch][i] * rec.samples[ch][i];
            }
            total /= static_cast<double>(window);
            const double fundamental = goertzel_power(
                rec.samples[ch], window, cfg.system_frequency,
                cfg.sample_rate);
            REQUIRE(fundamental >= 0.99 * total);
        }
    }
}

TEST_CASE("generation determinism and schedule independence") {
    CircuitConfig cfg;
    const WaveformRecord a = generate_record(cfg, EventClass::ABG, 42, 3, 0);
    const WaveformRecord b = generate_record(cfg, EventClass::ABG, 42, 3, 0);
    CHECK(records_identical(a, b));

    setenv("PQBENCH_THREADS", "1", 1);
    const auto serial = generate_dataset(cfg, 42, 2);
    setenv("PQBENCH_THREADS", "4", 1);
    const auto parallel = generate_dataset(cfg, 42, 2);
    setenv("PQBENCH_THREADS", "1", 1);
    REQUIRE(serial.size() == parallel.size());
    REQUIRE(static_cast<int>(serial.size()) == 13 * 2);
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].id == parallel[i].id);
        CHECK(records_identical(serial[i], parallel[i]));
    }
}
