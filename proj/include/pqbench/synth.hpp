#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pqbench::synth {

// ---------------------------------------------------------------------------
// Event taxonomy
// ---------------------------------------------------------------------------

// 13 event classes; codes 0-10 are transmission faults, 11-12 are breaker
// switching events. Codes are stable and equal the position in kClassNames.
enum class EventClass : int {
    AG = 0,
    BG,
    CG,
    ABG,
    ACG,
    BCG,
    ABCG,
    AB,
    AC,
    BC,
    ABC,
    LINE_ENERGIZE,
    LINE_DEENERGIZE,
};

inline constexpr int kNumClasses = 13;

const std::array<std::string, kNumClasses>& class_names();
EventClass class_from_code(int code);
EventClass class_from_name(const std::string& name);
const std::string& class_name(EventClass c);
inline int class_code(EventClass c) { return static_cast<int>(c); }
inline bool is_fault(EventClass c) { return class_code(c) <= 10; }

struct FaultSpec {
    bool phase_a = false;
    bool phase_b = false;
    bool phase_c = false;
    bool grounded = false;

    bool involves(int phase) const {
        return phase == 0 ? phase_a : (phase == 1 ? phase_b : phase_c);
    }
    int phase_count() const {
        return (phase_a ? 1 : 0) + (phase_b ? 1 : 0) + (phase_c ? 1 : 0);
    }
};

// Phase set and ground flag from the class name (AG -> {A}, grounded;
// switching classes -> empty set).
FaultSpec fault_topology(EventClass c);

// ---------------------------------------------------------------------------
// Circuit description
// ---------------------------------------------------------------------------

struct CircuitConfig {
    double nominal_voltage_ll = 380e3;  // volts, line-to-line RMS
    double system_frequency = 50.0;     // Hz
    double source_resistance = 1.0;     // ohm per phase
    double source_inductance = 30e-3;   // henry per phase
    double line_resistance = 3.0;       // ohm per phase, total series
    double line_inductance = 100e-3;    // henry per phase, total series
    // load wye neutral grounding resistor; high so the healthy circuit is
    // nearly zero-sequence-free but a small perturbation-driven ground
    // current can still flow
    double neutral_resistance = 5000.0;  // ohm
    double sample_rate = 4000.0;        // Hz, fixed
    double duration = 0.25;             // seconds, fixed

    int num_samples() const { return 1000; }
    void validate() const;  // throws std::invalid_argument
};

struct SynthParams {
    double event_time = 0.06;             // s
    double phase_fault_resistance = 1.0;  // ohm
    double ground_resistance = 1.0;       // ohm
    double fault_location_fraction = 0.5; // (0, 1)
    double breaker_delay = 0.06;          // s after event_time
    double load_resistance = 1000.0;      // ohm per phase
    double load_inductance = 1.0;         // henry per phase
    double load_capacitance = 2e-6;       // farad per phase
    std::array<double, 3> load_perturbation = {1.0, 1.0, 1.0};
    int record_index = 0;
    std::uint64_t master_seed = 0;
};

// Documented sampling ranges for SynthParams.
struct ParamRanges {
    double event_time_lo = 0.04, event_time_hi = 0.10;
    double fault_resistance_lo = 0.001, fault_resistance_hi = 150.0;
    double ground_resistance_lo = 0.001, ground_resistance_hi = 5.0;
    double location_lo = 0.05, location_hi = 0.95;
    double breaker_delay_lo = 0.05, breaker_delay_hi = 0.10;
    double load_r_lo = 500.0, load_r_hi = 2000.0;
    double load_l_lo = 0.5, load_l_hi = 3.0;
    double load_c_lo = 0.5e-6, load_c_hi = 5e-6;
    double perturb_lo = 0.98, perturb_hi = 1.02;
};

// Deterministic parameter draw from the stream derived from
// (master_seed, class code, index).
SynthParams sample_params(EventClass c, std::uint64_t master_seed, int index);

// ---------------------------------------------------------------------------
// Waveform record
// ---------------------------------------------------------------------------

inline constexpr int kNumChannels = 6;  // Va Vb Vc Ia Ib Ic
inline constexpr int kSamplesPerChannel = 1000;

struct WaveformRecord {
    std::int64_t id = 0;
    EventClass label = EventClass::AG;
    SynthParams params;
    // channel-major: samples[ch][n]
    std::array<std::vector<double>, kNumChannels> samples;
};

const std::array<std::string, kNumChannels>& channel_names();

// ---------------------------------------------------------------------------
// Companion-model integration pieces (exposed for direct testing)
// ---------------------------------------------------------------------------

// Trapezoidal companion of a series R-L branch. Branch current i flows from
// the + terminal to the - terminal; u is the branch voltage (+ minus -).
struct TrapRL {
    double resistance = 0.0;
    double inductance = 0.0;
    double geq = 0.0;   // dt / (2L + dt R)
    double i = 0.0;     // branch current at the last solved step
    double u = 0.0;     // branch voltage at the last solved step

    void prepare(double r, double l, double dt);
    // history current source for the next step
    double history() const;
    // commit the step given the new branch voltage
    void advance(double u_new) {
        i = geq * u_new + history();
        u = u_new;
    }
};

// Trapezoidal companion of a capacitor: i = C du/dt.
struct TrapC {
    double capacitance = 0.0;
    double geq = 0.0;   // 2C / dt
    double i = 0.0;
    double u = 0.0;

    void prepare(double c, double dt);
    double history() const;  // injected source term (Norton, sign as stamped)
    void advance(double u_new) {
        i = geq * u_new + history();
        u = u_new;
    }
};

// Dense Gaussian elimination with partial pivoting; throws on singularity.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b,
                                int n);

// Phasor (complex steady-state) solution of the pre-event network, used to
// seed branch histories so the record starts transient-free.
struct SteadyState {
    // per-phase branch states at t = 0
    std::array<double, 3> source_i{}, source_u{}, source_vls{};
    std::array<double, 3> line2_i{}, line2_u{};
    std::array<double, 3> load_i{}, load_u{};
    std::array<double, 3> cap_i{}, cap_u{};
    std::array<double, 3> relay_v{};
    // phasor magnitude of the source current (peak), for validation
    std::array<double, 3> source_i_mag{};
};

// breaker_closed = false gives the LINE_ENERGIZE pre-event state (all line
// and load states zero, source at no load).
SteadyState init_steady_state(const CircuitConfig& config,
                              const SynthParams& params, bool breaker_closed);

// Full timeline simulation; returns the 6 x 1000 record.
WaveformRecord simulate(const CircuitConfig& config, EventClass c,
                        const SynthParams& params);

// Convenience: sample params and simulate in one call.
WaveformRecord generate_record(const CircuitConfig& config, EventClass c,
                               std::uint64_t master_seed, int index,
                               std::int64_t id);

// Generates per_class records for every class; deterministic and
// independent of worker count (workers from PQBENCH_THREADS, default 1).
std::vector<WaveformRecord> generate_dataset(const CircuitConfig& config,
                                             std::uint64_t master_seed,
                                             int per_class);

// Single-bin Goertzel power at frequency f over x; returns the mean power
// attributable to that frequency (A^2/2 for a pure cosine of amplitude A).
double goertzel_power(const std::vector<double>& x, std::size_t count,
                      double freq, double sample_rate);

}  // namespace pqbench::synth
