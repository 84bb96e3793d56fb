#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qdefense/mdp.hpp"

namespace qdefense {

enum class TrainAction : int { take_loop = 0, take_bypass = 1 };

// Track sections 0-8. The outer loop visits 0..7 in order; the bypass leaves
// the loop at section 2, crosses section 8 and rejoins at section 6. Both
// trains decide between the two routes whenever they cross section 0.
struct TrackLayout {
    std::vector<int> loop_route{0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<int> bypass_route{0, 1, 2, 8, 6, 7};
    int decision_point = 0;

    int num_sections() const { return 9; }
};

// Two-train world. Train 1 is the defending agent, Train 2 the adversary.
// p is the probability that Train 2 mirrors a take-loop choice of the agent;
// q the probability that it mirrors a take-bypass choice (both match the
// self-loop mass of the scenario MDP). tau is the separation threshold: the
// safety constraint is violated when the gap is <= tau sections.
struct TrainWorld {
    TrackLayout track{};
    int train1_pos = 0;
    int train2_pos = 7;
    double p = 0.9;
    double q = 0.9;
    int tau = 1;
};

// Minimal forward travel, in sections, from Train 2's position to Train 1's
// position over the directed track graph (shorter of the loop and bypass
// continuations).
int separation_distance(const TrainWorld& world);

// Train 2's section when Train 1 has returned to section 0, per MDP state.
int state_train2_position(int mdp_state);
// Separation distance of that configuration: 1, 5 and 3 sections.
int state_separation(int mdp_state);

struct LapOutcome {
    int mdp_state = 0;
    int reward = 0;
};

// Result of one lap from the canonical configuration (Train 1 at 0, Train 2
// at 7): matching choices keep the one-section gap and pay nothing, agent
// loop vs adversary bypass opens the gap to five sections (reward 4), agent
// bypass vs adversary loop opens it to three (reward 2).
LapOutcome lap_outcome(TrainAction agent, TrainAction adversary);

// The 3-state, 2-action scenario MDP: state 0 is the decision point,
// states 1 and 2 (gap widened to 5 or 3) are terminal.
Mdp build_train_mdp(double p, double q, double gamma);

// Environment adapter over the lap dynamics; state_observable reports the
// separation distance of a state.
class TrainEnvironment final : public Environment {
public:
    TrainEnvironment(double p, double q);

    int num_states() const override { return 3; }
    int num_actions() const override { return 2; }
    int reset() override { return 0; }
    StepOutcome step(int state, int action, Rng& rng) override;
    double state_observable(int state) const override;

private:
    double p_;
    double q_;
};

enum class AgentPolicy { take_loop, take_bypass, uniform_random };

struct LapRecord {
    int epoch = 0;
    int distance = 0;
    int reward = 0;
    bool violation = false;
};

// Runs `epochs` laps from the canonical configuration; the adversary draws
// its route per p/q conditioned on the agent's choice. Deterministic per
// seed.
std::vector<LapRecord> simulate_laps(const TrainWorld& world, AgentPolicy policy,
                                     int epochs, std::uint64_t seed);

// Velocity-hijack attack on a train: from launch_time on, the victim's speed
// gains a drift alpha_v * exp(beta_v * t).
struct VelocityAttack {
    double launch_time = 0.0;
    double alpha_v = 0.0;  // drift constant, velocity units
    double beta_v = 0.0;   // exponent constant, per time unit
};

// v + alpha_v * exp(beta_v * (t + delta)); throws std::overflow_error when
// the exponential leaves double range.
double velocity_attack_speed(double v, const VelocityAttack& attack, double t,
                             double delta);

struct VelocityTracePoint {
    double time = 0.0;
    double velocity = 0.0;  // attacked train's speed
    double gap = 0.0;       // separation, sections
};

// Explicit-Euler integration of the gap between a nominal train and the
// attacked pursuer, sampled every `step` until the gap falls to tau or the
// horizon runs out; the trace stops at the first violating sample.
std::vector<VelocityTracePoint> velocity_gap_trace(double nominal_velocity,
                                                   const VelocityAttack& attack,
                                                   double initial_gap, double tau,
                                                   double step, double horizon);

// First sampled time at which the gap is <= tau, or nullopt when the horizon
// passes without a violation.
std::optional<double> time_to_violation(double nominal_velocity,
                                        const VelocityAttack& attack,
                                        double initial_gap, double tau,
                                        double step = 0.01, double horizon = 1000.0);

// 1 - exp(-x^2 / (2 sigma^2)) for x >= 0.
double rayleigh_cdf(double x, double sigma);

// First-order Marcum Q function via the modified-Bessel series of its
// complement, truncated when a term falls below 1e-12 of the running sum.
double marcum_q1(double a, double b);

// Rician CDF 1 - MarcumQ1(nu / sigma, x / sigma); reduces to the Rayleigh
// CDF at nu = 0.
double rician_cdf(double x, double nu, double sigma);

enum class AdversaryScenario { classical, balanced, quantum };

struct AttackCdfModel {
    enum class Family { rayleigh, rician };
    Family family = Family::rayleigh;
    double sigma = 1.0;
    double nu = 0.0;  // Rician only
    AdversaryScenario scenario = AdversaryScenario::classical;

    void validate() const;
};

double evaluate_cdf(const AttackCdfModel& model, double x);

struct CurvePoint {
    double investment = 0.0;
    double probability = 0.0;
};

// CDF over a sorted nonnegative investment grid.
std::vector<CurvePoint> attack_success_curve(const AttackCdfModel& model,
                                             const std::vector<double>& investments);

// Illustrative Rayleigh scales 3.0 / 2.0 / 1.2 so that at any investment a
// quantum-equipped adversary succeeds at least as often as a balanced one,
// and a balanced one at least as often as a classical one.
std::array<AttackCdfModel, 3> default_scenario_models();

const char* scenario_name(AdversaryScenario scenario);

}  // namespace qdefense
