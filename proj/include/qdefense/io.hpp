#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qdefense/mdp.hpp"
#include "qdefense/qrl.hpp"
#include "qdefense/qsim.hpp"
#include "qdefense/scenario.hpp"
#include "qdefense/vqc.hpp"

namespace qdefense {

// Shortest round-trip decimal representation ('.' separator, no locale).
std::string format_double(double value);

// MDP document: {states, actions, gamma, transitions: [{s, a, s', p, r}],
// terminal: [...]}. Loading re-validates every invariant, including the
// 1 +/- 1e-9 bound on each (s, a) probability group and agreement between
// the declared terminal set and the transition table.
nlohmann::json mdp_to_json(const Mdp& mdp);
Mdp mdp_from_json(const nlohmann::json& doc);

// Learned-angles document: {num_qubits, num_layers, angles: [[x, y, z], ...]}
// with rows stacked layer by layer.
nlohmann::json theta_to_json(const CircuitSpec& spec, const ThetaStack& theta);
std::pair<CircuitSpec, ThetaStack> theta_from_json(const nlohmann::json& doc);

// One line per amplitude: "index real imag" with 17 significant digits.
void write_statevector(std::ostream& os, const StateVector& state);

// Training trace CSV: epoch,state,action,reward,distance,v0,p_action0,...
std::string trace_to_csv(const TrainingTrace& trace, int num_actions);
nlohmann::json trace_to_json(const TrainingTrace& trace, int num_actions);

// Lap trace CSV: epoch,distance,reward,violation.
std::string laps_to_csv(const std::vector<LapRecord>& records);
nlohmann::json laps_to_json(const std::vector<LapRecord>& records);

}  // namespace qdefense
