#include "qdefense/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <stdexcept>

namespace qdefense {

std::string format_double(double value) {
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (result.ec != std::errc{}) {
        throw std::runtime_error("failed to format double");
    }
    return std::string(buffer, result.ptr);
}

nlohmann::json mdp_to_json(const Mdp& mdp) {
    mdp.validate();
    nlohmann::json doc;
    doc["states"] = mdp.num_states;
    doc["actions"] = mdp.num_actions;
    doc["gamma"] = mdp.discount;
    nlohmann::json transitions = nlohmann::json::array();
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            for (const Transition& t : mdp.at(s, a)) {
                transitions.push_back({{"s", s},
                                       {"a", a},
                                       {"s'", t.next_state},
                                       {"p", t.probability},
                                       {"r", t.reward}});
            }
        }
    }
    doc["transitions"] = std::move(transitions);
    nlohmann::json terminal = nlohmann::json::array();
    for (int s = 0; s < mdp.num_states; ++s) {
        if (mdp.is_terminal(s)) {
            terminal.push_back(s);
        }
    }
    doc["terminal"] = std::move(terminal);
    return doc;
}

Mdp mdp_from_json(const nlohmann::json& doc) {
    static const std::set<std::string> allowed{"states", "actions", "gamma",
                                               "transitions", "terminal"};
    for (const auto& item : doc.items()) {
        if (!allowed.contains(item.key())) {
            throw std::invalid_argument("unknown MDP field '" + item.key() + "'");
        }
    }
    Mdp mdp = Mdp::empty(doc.at("states").get<int>(), doc.at("actions").get<int>(),
                         doc.at("gamma").get<double>());
    for (const auto& entry : doc.at("transitions")) {
        mdp.add(entry.at("s").get<int>(), entry.at("a").get<int>(),
                entry.at("s'").get<int>(), entry.at("p").get<double>(),
                entry.at("r").get<double>());
    }
    mdp.validate();
    if (doc.contains("terminal")) {
        std::set<int> declared;
        for (const auto& s : doc.at("terminal")) {
            declared.insert(s.get<int>());
        }
        for (int s = 0; s < mdp.num_states; ++s) {
            if (mdp.is_terminal(s) != declared.contains(s)) {
                throw std::invalid_argument(
                    "declared terminal set disagrees with transition table at state " +
                    std::to_string(s));
            }
        }
    }
    return mdp;
}

nlohmann::json theta_to_json(const CircuitSpec& spec, const ThetaStack& theta) {
    spec.validate();
    if (theta.size() != static_cast<std::size_t>(spec.num_layers)) {
        throw std::invalid_argument("theta stack does not match circuit layers");
    }
    nlohmann::json doc;
    doc["num_qubits"] = spec.num_qubits;
    doc["num_layers"] = spec.num_layers;
    nlohmann::json angles = nlohmann::json::array();
    for (const Theta& layer : theta) {
        if (layer.rows() != spec.num_qubits) {
            throw std::invalid_argument("theta layer does not match qubit count");
        }
        for (Eigen::Index row = 0; row < layer.rows(); ++row) {
            angles.push_back({layer(row, 0), layer(row, 1), layer(row, 2)});
        }
    }
    doc["angles"] = std::move(angles);
    return doc;
}

std::pair<CircuitSpec, ThetaStack> theta_from_json(const nlohmann::json& doc) {
    static const std::set<std::string> allowed{"num_qubits", "num_layers", "angles"};
    for (const auto& item : doc.items()) {
        if (!allowed.contains(item.key())) {
            throw std::invalid_argument("unknown theta field '" + item.key() + "'");
        }
    }
    CircuitSpec spec;
    spec.num_qubits = doc.at("num_qubits").get<int>();
    spec.num_layers = doc.at("num_layers").get<int>();
    spec.entangling = spec.num_qubits > 1;
    spec.validate();

    const auto& angles = doc.at("angles");
    const std::size_t expected_rows =
        static_cast<std::size_t>(spec.num_layers) *
        static_cast<std::size_t>(spec.num_qubits);
    if (angles.size() != expected_rows) {
        throw std::invalid_argument("angle row count does not match circuit shape");
    }
    ThetaStack stack = zero_theta_stack(spec);
    std::size_t index = 0;
    for (Theta& layer : stack) {
        for (Eigen::Index row = 0; row < layer.rows(); ++row, ++index) {
            const auto& entry = angles.at(index);
            if (entry.size() != 3) {
                throw std::invalid_argument("each angle row needs exactly 3 entries");
            }
            for (Eigen::Index col = 0; col < 3; ++col) {
                layer(row, col) = entry.at(static_cast<std::size_t>(col)).get<double>();
            }
        }
    }
    return {spec, std::move(stack)};
}

void write_statevector(std::ostream& os, const StateVector& state) {
    char line[96];
    for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
        std::snprintf(line, sizeof(line), "%lld %.17g %.17g\n",
                      static_cast<long long>(i), state.amplitudes(i).real(),
                      state.amplitudes(i).imag());
        os << line;
    }
}

std::string trace_to_csv(const TrainingTrace& trace, int num_actions) {
    std::string out = "epoch,state,action,reward,distance,v0";
    for (int a = 0; a < num_actions; ++a) {
        out += ",p_action" + std::to_string(a);
    }
    out += '\n';
    for (const TraceRecord& record : trace.records) {
        out += std::to_string(record.epoch);
        out += ',';
        out += std::to_string(record.state);
        out += ',';
        out += std::to_string(record.action);
        out += ',';
        out += format_double(record.reward);
        out += ',';
        out += format_double(record.distance);
        out += ',';
        out += format_double(record.v0);
        for (double p : record.action_probabilities) {
            out += ',';
            out += format_double(p);
        }
        out += '\n';
    }
    return out;
}

nlohmann::json trace_to_json(const TrainingTrace& trace, int num_actions) {
    nlohmann::json rows = nlohmann::json::array();
    for (const TraceRecord& record : trace.records) {
        nlohmann::json row;
        row["epoch"] = record.epoch;
        row["state"] = record.state;
        row["action"] = record.action;
        row["reward"] = record.reward;
        row["distance"] = record.distance;
        row["v0"] = record.v0;
        for (int a = 0; a < num_actions; ++a) {
            row["p_action" + std::to_string(a)] =
                record.action_probabilities.at(static_cast<std::size_t>(a));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string laps_to_csv(const std::vector<LapRecord>& records) {
    std::string out = "epoch,distance,reward,violation\n";
    for (const LapRecord& record : records) {
        out += std::to_string(record.epoch);
        out += ',';
        out += std::to_string(record.distance);
        out += ',';
        out += std::to_string(record.reward);
        out += ',';
        out += record.violation ? '1' : '0';
        out += '\n';
    }
    return out;
}

nlohmann::json laps_to_json(const std::vector<LapRecord>& records) {
    nlohmann::json rows = nlohmann::json::array();
    for (const LapRecord& record : records) {
        rows.push_back({{"epoch", record.epoch},
                        {"distance", record.distance},
                        {"reward", record.reward},
                        {"violation", record.violation}});
    }
    return rows;
}

}  // namespace qdefense
