#include "pqbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

#include "pqbench/parallel.hpp"
#include "pqbench/rng.hpp"

namespace pqbench::synth {

namespace {

constexpr double kPi = std::numbers::pi;

// Unknown node ordering for the transient solve.
// 0..2 fault nodes Fa Fb Fc, 3..5 load buses Ba Bb Bc,
// 6 load neutral M (floating wye), 7 common fault node N.
constexpr int kNodeF = 0;
constexpr int kNodeB = 3;
constexpr int kNodeM = 6;
constexpr int kNodeN = 7;
constexpr int kNumNodes = 8;

// Keeps otherwise-isolated nodes (N before the fault closes) solvable.
constexpr double kLeakConductance = 1e-12;

double peak_phase_voltage(const CircuitConfig& c) {
    return c.nominal_voltage_ll * std::sqrt(2.0) / std::sqrt(3.0);
}

double source_angle(int phase) {
    static const double angles[3] = {0.0, -2.0 * kPi / 3.0, 2.0 * kPi / 3.0};
    return angles[phase];
}

double emf(const CircuitConfig& c, int phase, double t) {
    const double w = 2.0 * kPi * c.system_frequency;
    return peak_phase_voltage(c) * std::cos(w * t + source_angle(phase));
}

template <typename T>
std::vector<T> gauss_solve(std::vector<T> a, std::vector<T> b, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::abs(a[col * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double mag = std::abs(a[r * n + col]);
            if (mag > best) {
                best = mag;
                pivot = r;
            }
        }
        if (!(best > 0.0)) {
            throw std::runtime_error("singular nodal matrix");
        }
        if (pivot != col) {
            for (int k = col; k < n; ++k) {
                std::swap(a[col * n + k], a[pivot * n + k]);
            }
            std::swap(b[col], b[pivot]);
        }
        const T inv = T(1.0) / a[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            const T factor = a[r * n + col] * inv;
            if (factor == T(0.0)) continue;
            for (int k = col; k < n; ++k) {
                a[r * n + k] -= factor * a[col * n + k];
            }
            b[r] -= factor * b[col];
        }
    }
    std::vector<T> x(n);
    for (int r = n - 1; r >= 0; --r) {
        T s = b[r];
        for (int k = r + 1; k < n; ++k) {
            s -= a[r * n + k] * x[k];
        }
        x[r] = s / a[r * n + r];
    }
    return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Taxonomy
// ---------------------------------------------------------------------------

const std::array<std::string, kNumClasses>& class_names() {
    static const std::array<std::string, kNumClasses> names = {
        "AG",  "BG",  "CG",  "ABG", "ACG",           "BCG",
        "ABCG", "AB", "AC",  "BC",  "ABC",           "LINE_ENERGIZE",
        "LINE_DEENERGIZE"};
    return names;
}

EventClass class_from_code(int code) {
    if (code < 0 || code >= kNumClasses) {
        throw std::invalid_argument("event class code out of range: " +
                                    std::to_string(code));
    }
    return static_cast<EventClass>(code);
}

EventClass class_from_name(const std::string& name) {
    const auto& names = class_names();
    for (int i = 0; i < kNumClasses; ++i) {
        if (names[i] == name) return static_cast<EventClass>(i);
    }
    throw std::invalid_argument("unknown event class: " + name);
}

const std::string& class_name(EventClass c) {
    return class_names()[class_code(c)];
}

FaultSpec fault_topology(EventClass c) {
    FaultSpec spec;
    if (!is_fault(c)) return spec;
    const std::string& name = class_name(c);
    for (char ch : name) {
        switch (ch) {
            case 'A': spec.phase_a = true; break;
            case 'B': spec.phase_b = true; break;
            case 'C': spec.phase_c = true; break;
            case 'G': spec.grounded = true; break;
        }
    }
    return spec;
}

const std::array<std::string, kNumChannels>& channel_names() {
    static const std::array<std::string, kNumChannels> names = {
        "Va", "Vb", "Vc", "Ia", "Ib", "Ic"};
    return names;
}

// ---------------------------------------------------------------------------
// Configuration and parameters
// ---------------------------------------------------------------------------

void CircuitConfig::validate() const {
    if (std::lround(sample_rate * duration) != kSamplesPerChannel) {
        throw std::invalid_argument(
            "sample_rate * duration must give exactly 1000 samples");
    }
    const double imps[] = {source_resistance, source_inductance,
                           line_resistance, line_inductance,
                           neutral_resistance};
    for (double v : imps) {
        if (!(v > 0.0)) {
            throw std::invalid_argument("impedance values must be positive");
        }
    }
    if (!(nominal_voltage_ll > 0.0) || !(system_frequency > 0.0)) {
        throw std::invalid_argument("voltage and frequency must be positive");
    }
}

SynthParams sample_params(EventClass c, std::uint64_t master_seed, int index) {
    if (index < 0) throw std::invalid_argument("record index must be >= 0");
    const ParamRanges r;
    SplitMix64 rng(derive_seed(master_seed,
                               static_cast<std::uint64_t>(class_code(c)),
                               static_cast<std::uint64_t>(index)));
    SynthParams p;
    p.event_time = rng.uniform(r.event_time_lo, r.event_time_hi);
    p.phase_fault_resistance =
        rng.uniform(r.fault_resistance_lo, r.fault_resistance_hi);
    p.ground_resistance =
        rng.uniform(r.ground_resistance_lo, r.ground_resistance_hi);
    p.fault_location_fraction = rng.uniform(r.location_lo, r.location_hi);
    p.breaker_delay = rng.uniform(r.breaker_delay_lo, r.breaker_delay_hi);
    p.load_resistance = rng.uniform(r.load_r_lo, r.load_r_hi);
    p.load_inductance = rng.uniform(r.load_l_lo, r.load_l_hi);
    p.load_capacitance = rng.uniform(r.load_c_lo, r.load_c_hi);
    for (int i = 0; i < 3; ++i) {
        p.load_perturbation[i] = rng.uniform(r.perturb_lo, r.perturb_hi);
    }
    p.record_index = index;
    p.master_seed = master_seed;
    return p;
}

namespace {

void validate_params(const CircuitConfig& config, const SynthParams& p) {
    if (!(p.event_time > 0.0) ||
        !(p.event_time + p.breaker_delay < config.duration)) {
        throw std::invalid_argument(
            "event_time + breaker_delay must fall inside the record");
    }
    if (!(p.phase_fault_resistance > 0.0) || !(p.ground_resistance > 0.0)) {
        throw std::invalid_argument("fault resistances must be positive");
    }
    if (!(p.fault_location_fraction > 0.0) ||
        !(p.fault_location_fraction < 1.0)) {
        throw std::invalid_argument("fault location must lie in (0, 1)");
    }
    if (!(p.load_resistance > 0.0) || !(p.load_inductance > 0.0) ||
        !(p.load_capacitance > 0.0)) {
        throw std::invalid_argument("load R, L, C must be positive");
    }
    for (double f : p.load_perturbation) {
        if (!(f > 0.0)) {
            throw std::invalid_argument("load perturbation must be positive");
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Companion elements
// ---------------------------------------------------------------------------

void TrapRL::prepare(double r, double l, double dt) {
    resistance = r;
    inductance = l;
    geq = dt / (2.0 * l + dt * r);
}

double TrapRL::history() const {
    // i_n = geq*u_n + [ (2L - dtR) i + dt u ] / (2L + dtR)
    // with geq = dt/(2L + dtR): (2L - dtR)/(2L + dtR) = 1 - 2*geq*R
    return (1.0 - 2.0 * geq * resistance) * i + geq * u;
}

void TrapC::prepare(double c, double dt) {
    capacitance = c;
    geq = 2.0 * c / dt;
}

double TrapC::history() const { return -(geq * u + i); }

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b,
                                int n) {
    return gauss_solve<double>(std::move(a), std::move(b), n);
}

// ---------------------------------------------------------------------------
// Steady state (phasor) initialization
// ---------------------------------------------------------------------------

SteadyState init_steady_state(const CircuitConfig& config,
                              const SynthParams& params, bool breaker_closed) {
    config.validate();
    validate_params(config, params);
    SteadyState st;
    const double vm = peak_phase_voltage(config);

    if (!breaker_closed) {
        // De-energized line and load; source idles at no load.
        for (int p = 0; p < 3; ++p) {
            st.relay_v[p] = vm * std::cos(source_angle(p));
        }
        return st;
    }

    using cd = std::complex<double>;
    const double w = 2.0 * kPi * config.system_frequency;
    const cd jw(0.0, w);
    const double f = params.fault_location_fraction;

    // Unknown phasors: Fa Fb Fc Ba Bb Bc M (fault branches open pre-event).
    const int n = 7;
    std::vector<cd> g(n * n, cd(0.0));
    std::vector<cd> j(n, cd(0.0));

    std::array<cd, 3> e, ysrc, y2, yload, ycap;
    for (int p = 0; p < 3; ++p) {
        e[p] = std::polar(vm, source_angle(p));
        const cd zsrc = cd(config.source_resistance +
                           f * config.line_resistance) +
                        jw * (config.source_inductance +
                              f * config.line_inductance);
        const cd z2 = cd((1.0 - f) * config.line_resistance) +
                      jw * ((1.0 - f) * config.line_inductance);
        const double k = params.load_perturbation[p];
        const cd zload = cd(k * params.load_resistance) +
                         jw * (k * params.load_inductance);
        ysrc[p] = 1.0 / zsrc;
        y2[p] = 1.0 / z2;
        yload[p] = 1.0 / zload;
        ycap[p] = jw * (k * params.load_capacitance);
    }
    for (int p = 0; p < 3; ++p) {
        const int nf = p;
        const int nb = 3 + p;
        const int nm = 6;
        // source (Norton) into F
        g[nf * n + nf] += ysrc[p];
        j[nf] += ysrc[p] * e[p];
        // line segment 2: F - B
        g[nf * n + nf] += y2[p];
        g[nf * n + nb] -= y2[p];
        g[nb * n + nb] += y2[p];
        g[nb * n + nf] -= y2[p];
        // load and shunt cap: B - M
        const cd ybm = yload[p] + ycap[p];
        g[nb * n + nb] += ybm;
        g[nb * n + nm] -= ybm;
        g[nm * n + nm] += ybm;
        g[nm * n + nb] -= ybm;
    }
    // neutral grounding resistor at M
    g[6 * n + 6] += cd(1.0 / config.neutral_resistance);
    std::vector<cd> v;
    try {
        v = gauss_solve<cd>(std::move(g), std::move(j), n);
    } catch (const std::runtime_error&) {
        throw std::invalid_argument(
            "non-physical circuit parameters: singular pre-event network");
    }

    for (int p = 0; p < 3; ++p) {
        const cd vf = v[p];
        const cd vb = v[3 + p];
        const cd vmn = v[6];
        const cd is = ysrc[p] * (e[p] - vf);
        const cd i2 = y2[p] * (vf - vb);
        const cd il = yload[p] * (vb - vmn);
        const cd ic = ycap[p] * (vb - vmn);
        st.source_i[p] = is.real();
        st.source_u[p] = (e[p] - vf).real();
        st.source_vls[p] = (jw * config.source_inductance * is).real();
        st.line2_i[p] = i2.real();
        st.line2_u[p] = (vf - vb).real();
        st.load_i[p] = il.real();
        st.load_u[p] = (vb - vmn).real();
        st.cap_i[p] = ic.real();
        st.cap_u[p] = (vb - vmn).real();
        st.relay_v[p] =
            (e[p] - (cd(config.source_resistance) +
                     jw * config.source_inductance) * is).real();
        st.source_i_mag[p] = std::abs(is);
    }
    return st;
}

// ---------------------------------------------------------------------------
// Timeline simulation
// ---------------------------------------------------------------------------

WaveformRecord simulate(const CircuitConfig& config, EventClass c,
                        const SynthParams& params) {
    config.validate();
    validate_params(config, params);

    const FaultSpec fault = fault_topology(c);
    const bool energize = (c == EventClass::LINE_ENERGIZE);
    const bool deenergize = (c == EventClass::LINE_DEENERGIZE);
    const double dt = 1.0 / config.sample_rate;
    const double f = params.fault_location_fraction;
    const int nsamp = config.num_samples();

    const SteadyState st = init_steady_state(config, params, !energize);

    WaveformRecord rec;
    rec.label = c;
    rec.params = params;
    for (auto& ch : rec.samples) ch.assign(nsamp, 0.0);

    std::array<TrapRL, 3> source, line2, load;
    std::array<TrapC, 3> cap;
    std::array<double, 3> vls{};
    std::array<bool, 3> pole_closed{};
    for (int p = 0; p < 3; ++p) {
        const double k = params.load_perturbation[p];
        source[p].prepare(
            config.source_resistance + f * config.line_resistance,
            config.source_inductance + f * config.line_inductance, dt);
        line2[p].prepare((1.0 - f) * config.line_resistance,
                         (1.0 - f) * config.line_inductance, dt);
        load[p].prepare(k * params.load_resistance,
                        k * params.load_inductance, dt);
        cap[p].prepare(k * params.load_capacitance, dt);
        source[p].i = st.source_i[p];
        source[p].u = st.source_u[p];
        line2[p].i = st.line2_i[p];
        line2[p].u = st.line2_u[p];
        load[p].i = st.load_i[p];
        load[p].u = st.load_u[p];
        cap[p].i = st.cap_i[p];
        cap[p].u = st.cap_u[p];
        vls[p] = st.source_vls[p];
        pole_closed[p] = !energize;
        rec.samples[p][0] = st.relay_v[p];
        rec.samples[3 + p][0] = st.source_i[p];
    }

    const double trip_time = deenergize
                                 ? params.event_time
                                 : params.event_time + params.breaker_delay;
    const bool has_trip = deenergize || is_fault(c);
    const double half_dt = 0.5 * dt;  // sample-boundary switching tolerance

    std::vector<double> g(kNumNodes * kNumNodes);
    std::vector<double> j(kNumNodes);

    for (int k = 1; k < nsamp; ++k) {
        const double t = k * dt;
        const bool fault_on = is_fault(c) && t >= params.event_time - half_dt;
        const bool armed = has_trip && t >= trip_time - half_dt;
        if (energize && t >= params.event_time - half_dt) {
            pole_closed = {true, true, true};
        }

        std::fill(g.begin(), g.end(), 0.0);
        std::fill(j.begin(), j.end(), 0.0);
        for (int node = 0; node < kNumNodes; ++node) {
            g[node * kNumNodes + node] += kLeakConductance;
        }
        std::array<double, 3> e_now;
        for (int p = 0; p < 3; ++p) {
            e_now[p] = emf(config, p, t);
            const int nf = kNodeF + p;
            const int nb = kNodeB + p;
            if (pole_closed[p]) {
                g[nf * kNumNodes + nf] += source[p].geq;
                j[nf] += source[p].geq * e_now[p] + source[p].history();
            }
            auto stamp_rl = [&](const TrapRL& br, int a, int b) {
                g[a * kNumNodes + a] += br.geq;
                g[a * kNumNodes + b] -= br.geq;
                g[b * kNumNodes + b] += br.geq;
                g[b * kNumNodes + a] -= br.geq;
                const double ih = br.history();
                j[a] -= ih;
                j[b] += ih;
            };
            stamp_rl(line2[p], nf, nb);
            stamp_rl(load[p], nb, kNodeM);
            // shunt capacitor B - M
            g[nb * kNumNodes + nb] += cap[p].geq;
            g[nb * kNumNodes + kNodeM] -= cap[p].geq;
            g[kNodeM * kNumNodes + kNodeM] += cap[p].geq;
            g[kNodeM * kNumNodes + nb] -= cap[p].geq;
            const double ihc = cap[p].history();
            j[nb] -= ihc;
            j[kNodeM] += ihc;
            if (fault_on && fault.involves(p)) {
                const double gf = 1.0 / params.phase_fault_resistance;
                g[nf * kNumNodes + nf] += gf;
                g[nf * kNumNodes + kNodeN] -= gf;
                g[kNodeN * kNumNodes + kNodeN] += gf;
                g[kNodeN * kNumNodes + nf] -= gf;
            }
        }
        g[kNodeM * kNumNodes + kNodeM] += 1.0 / config.neutral_resistance;
        if (fault_on && fault.grounded) {
            g[kNodeN * kNumNodes + kNodeN] += 1.0 / params.ground_resistance;
        }

        const std::vector<double> v = solve_dense(g, j, kNumNodes);

        for (int p = 0; p < 3; ++p) {
            const int nf = kNodeF + p;
            const int nb = kNodeB + p;
            line2[p].advance(v[nf] - v[nb]);
            load[p].advance(v[nb] - v[kNodeM]);
            cap[p].advance(v[nb] - v[kNodeM]);
            if (!pole_closed[p]) {
                rec.samples[p][k] = e_now[p];
                rec.samples[3 + p][k] = 0.0;
                continue;
            }
            const double i_prev = source[p].i;
            source[p].advance(e_now[p] - v[nf]);
            const double i_new = source[p].i;
            const bool crossing = (i_prev > 0.0 && i_new <= 0.0) ||
                                  (i_prev < 0.0 && i_new >= 0.0) ||
                                  i_prev == 0.0;
            if (armed && crossing) {
                // ideal pole interrupts at the zero crossing
                pole_closed[p] = false;
                source[p].i = 0.0;
                source[p].u = 0.0;
                vls[p] = 0.0;
                rec.samples[p][k] = e_now[p];
                rec.samples[3 + p][k] = 0.0;
            } else {
                const double vls_new =
                    (2.0 * config.source_inductance / dt) * (i_new - i_prev) -
                    vls[p];
                vls[p] = vls_new;
                rec.samples[p][k] =
                    e_now[p] - config.source_resistance * i_new - vls_new;
                rec.samples[3 + p][k] = i_new;
            }
        }
    }

    for (const auto& ch : rec.samples) {
        for (double x : ch) {
            if (!std::isfinite(x)) {
                throw std::runtime_error("non-finite sample in simulation");
            }
        }
    }
    return rec;
}

WaveformRecord generate_record(const CircuitConfig& config, EventClass c,
                               std::uint64_t master_seed, int index,
                               std::int64_t id) {
    WaveformRecord rec = simulate(config, c, sample_params(c, master_seed, index));
    rec.id = id;
    return rec;
}

std::vector<WaveformRecord> generate_dataset(const CircuitConfig& config,
                                             std::uint64_t master_seed,
                                             int per_class) {
    if (per_class <= 0) {
        throw std::invalid_argument("per_class must be positive");
    }
    const int total = kNumClasses * per_class;
    std::vector<WaveformRecord> records(total);
    parallel_for(total, [&](int flat) {
        const EventClass c = static_cast<EventClass>(flat / per_class);
        const int index = flat % per_class;
        records[flat] = generate_record(config, c, master_seed, index, flat);
    });
    return records;
}

double goertzel_power(const std::vector<double>& x, std::size_t count,
                      double freq, double sample_rate) {
    const std::size_t n = std::min(count, x.size());
    if (n == 0) return 0.0;
    const double w = 2.0 * kPi * freq / sample_rate;
    const double coeff = 2.0 * std::cos(w);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s0 = x[i] + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    const double mag2 = s1 * s1 + s2 * s2 - coeff * s1 * s2;
    // mean power at this bin; A^2/2 for a pure cosine of amplitude A
    return 2.0 * mag2 / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace pqbench::synth
