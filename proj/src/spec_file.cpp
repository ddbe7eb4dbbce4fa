// SPDX-License-Identifier: Apache-2.0
//
// ramimo - multi-user MIMO simulation with pattern-reconfigurable antennas
// Copyright (C) 2026 The ramimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ramimo/harness.hpp"

using nlohmann::json;

namespace ramimo
{
    const char *to_string(Scenario s)
    {
        switch (s)
        {
        case Scenario::fig2:
            return "fig2";
        case Scenario::fig3:
            return "fig3";
        case Scenario::fig4:
            return "fig4";
        case Scenario::fig56:
            return "fig56";
        }
        return "unknown";
    }

    Scenario scenario_from_string(const std::string &name)
    {
        for (auto s : {Scenario::fig2, Scenario::fig3, Scenario::fig4, Scenario::fig56})
            if (name == to_string(s))
                return s;
        throw std::invalid_argument("unknown scenario '" + name + "' (expected fig2, fig3, fig4 or fig56)");
    }

    static std::vector<std::string> allowed_schemes(Scenario s)
    {
        switch (s)
        {
        case Scenario::fig2:
            return {scheme::full_digital, scheme::exhaustive, scheme::alt_rate, scheme::alt_eig, scheme::fixed};
        case Scenario::fig3:
        case Scenario::fig4:
            return {scheme::optimal, scheme::offline_channel, scheme::offline_pattern};
        case Scenario::fig56:
            return {scheme::perfect, scheme::estimated_optimal, scheme::estimated_offline, scheme::estimated_pattern};
        }
        return {};
    }

    ExperimentSpec default_experiment_spec(Scenario s)
    {
        ExperimentSpec spec;
        spec.scenario = s;
        spec.schemes = allowed_schemes(s);
        spec.output = std::string(to_string(s)) + ".csv";
        switch (s)
        {
        case Scenario::fig2:
            // Exhaustive search over 10^8 states exceeds the default budget at this size.
            spec.schemes.erase(spec.schemes.begin() + 1);
            spec.snr_db = {-10, -5, 0, 5, 10, 15, 20, 25, 30};
            spec.trials = 500;
            break;
        case Scenario::fig3:
            spec.snr_db = {20};
            for (std::size_t f = 1; f <= spec.system.modes; ++f)
                spec.training.push_back(f);
            spec.trials = 2000;
            break;
        case Scenario::fig4:
            spec.snr_db = {0, 5, 10, 15, 20, 25, 30};
            spec.training = {3};
            spec.trials = 2000;
            break;
        case Scenario::fig56:
            spec.snr_db = {0, 10, 20, 30};
            spec.training = {3};
            spec.trials = 500;
            break;
        }
        return spec;
    }

    void ExperimentSpec::validate() const
    {
        auto fail = [](const std::string &msg) { throw std::invalid_argument("experiment spec: " + msg); };
        system.validate();
        if (trials < 1)
            fail("trials must be at least 1");
        if (snr_db.empty())
            fail("snr_db must list at least one value");
        if (schemes.empty())
            fail("schemes must list at least one scheme");
        const auto allowed = allowed_schemes(scenario);
        std::set<std::string> seen;
        for (const auto &s : schemes)
        {
            if (std::find(allowed.begin(), allowed.end(), s) == allowed.end())
                fail("scheme '" + s + "' is not available for " + to_string(scenario));
            if (!seen.insert(s).second)
                fail("duplicate scheme '" + s + "'");
        }
        if (scenario == Scenario::fig3 && snr_db.size() != 1)
            fail("fig3 runs at a single SNR");
        if (scenario != Scenario::fig2)
        {
            if (training.empty())
                fail("training must list at least one F");
            if (scenario != Scenario::fig3 && training.size() != 1)
                fail("fig4 and fig56 use a single F");
            for (auto f : training)
                if (f < 1 || f > system.modes)
                    fail("F = " + std::to_string(f) + " outside 1.." + std::to_string(system.modes));
            if (sectors < 1)
                fail("sectors must be at least 1");
            if (calibration_realizations < 1)
                fail("calibration_realizations must be at least 1");
        }
        if (max_sweeps < 1)
            fail("max_sweeps must be at least 1");
        if (!(beamwidth_deg > 0.0) || !(pattern_exponent > 0.0))
            fail("pattern beamwidth and exponent must be positive");
    }

    static void reject_unknown(const json &obj, std::initializer_list<const char *> keys, const std::string &where)
    {
        if (!obj.is_object())
            throw std::invalid_argument("experiment spec: " + where + " must be an object");
        for (const auto &item : obj.items())
        {
            bool known = false;
            for (const char *k : keys)
                known = known || item.key() == k;
            if (!known)
                throw std::invalid_argument("experiment spec: unknown key '" + item.key() + "' in " + where);
        }
    }

    template <typename T>
    static void read_if(const json &obj, const char *key, T &out)
    {
        if (obj.contains(key))
        {
            try
            {
                out = obj.at(key).get<T>();
            }
            catch (const json::exception &e)
            {
                throw std::invalid_argument(std::string("experiment spec: bad value for '") + key + "': " + e.what());
            }
        }
    }

    ExperimentSpec parse_experiment_spec(const std::string &json_text)
    {
        json doc;
        try
        {
            doc = json::parse(json_text);
        }
        catch (const json::parse_error &e)
        {
            throw std::invalid_argument(std::string("experiment spec: ") + e.what());
        }
        reject_unknown(doc,
                       {"scenario", "system", "snr_db", "training", "schemes", "trials", "seed", "output", "threads",
                        "sectors", "calibration_realizations", "max_sweeps", "exhaustive_budget", "pattern"},
                       "spec");
        if (!doc.contains("scenario"))
            throw std::invalid_argument("experiment spec: 'scenario' is required");

        ExperimentSpec spec = default_experiment_spec(scenario_from_string(doc.at("scenario").get<std::string>()));
        if (doc.contains("system"))
        {
            const json &sys = doc.at("system");
            reject_unknown(sys, {"n_tx", "n_rx", "users", "n_rf", "streams_per_user", "modes", "tx_rows", "tx_cols", "rho"},
                           "system");
            auto &c = spec.system;
            read_if(sys, "n_tx", c.n_tx);
            read_if(sys, "n_rx", c.n_rx);
            read_if(sys, "users", c.users);
            read_if(sys, "n_rf", c.n_rf);
            read_if(sys, "streams_per_user", c.streams_per_user);
            read_if(sys, "modes", c.modes);
            read_if(sys, "tx_rows", c.tx_rows);
            read_if(sys, "tx_cols", c.tx_cols);
            read_if(sys, "rho", c.rho);
            // The default F sweep follows the mode count.
            if (spec.scenario == Scenario::fig3 && !doc.contains("training"))
            {
                spec.training.clear();
                for (std::size_t f = 1; f <= c.modes; ++f)
                    spec.training.push_back(f);
            }
        }
        if (doc.contains("pattern"))
        {
            const json &pat = doc.at("pattern");
            reject_unknown(pat, {"beamwidth_deg", "exponent"}, "pattern");
            read_if(pat, "beamwidth_deg", spec.beamwidth_deg);
            read_if(pat, "exponent", spec.pattern_exponent);
        }
        read_if(doc, "snr_db", spec.snr_db);
        read_if(doc, "training", spec.training);
        read_if(doc, "schemes", spec.schemes);
        read_if(doc, "trials", spec.trials);
        read_if(doc, "seed", spec.seed);
        read_if(doc, "output", spec.output);
        read_if(doc, "threads", spec.threads);
        read_if(doc, "sectors", spec.sectors);
        read_if(doc, "calibration_realizations", spec.calibration_realizations);
        read_if(doc, "max_sweeps", spec.max_sweeps);
        read_if(doc, "exhaustive_budget", spec.exhaustive_budget);
        spec.validate();
        return spec;
    }

    ExperimentSpec load_experiment_spec(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open spec file '" + path + "'");
        std::ostringstream text;
        text << in.rdbuf();
        return parse_experiment_spec(text.str());
    }

    static json to_json(const ExperimentSpec &spec, bool with_runtime)
    {
        const auto &c = spec.system;
        json doc = {
            {"scenario", to_string(spec.scenario)},
            {"system",
             {{"n_tx", c.n_tx},
              {"n_rx", c.n_rx},
              {"users", c.users},
              {"n_rf", c.n_rf},
              {"streams_per_user", c.streams_per_user},
              {"modes", c.modes},
              {"tx_rows", c.tx_rows},
              {"tx_cols", c.tx_cols},
              {"rho", c.rho}}},
            {"snr_db", spec.snr_db},
            {"training", spec.training},
            {"schemes", spec.schemes},
            {"trials", spec.trials},
            {"seed", spec.seed},
            {"sectors", spec.sectors},
            {"calibration_realizations", spec.calibration_realizations},
            {"max_sweeps", spec.max_sweeps},
            {"exhaustive_budget", spec.exhaustive_budget},
            {"pattern", {{"beamwidth_deg", spec.beamwidth_deg}, {"exponent", spec.pattern_exponent}}},
        };
        if (with_runtime)
        {
            doc["output"] = spec.output;
            doc["threads"] = spec.threads;
        }
        return doc;
    }

    std::string experiment_spec_json(const ExperimentSpec &spec)
    {
        return to_json(spec, true).dump(2) + "\n";
    }

    std::uint64_t spec_hash(const ExperimentSpec &spec)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : to_json(spec, false).dump())
        {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        return h;
    }
}
