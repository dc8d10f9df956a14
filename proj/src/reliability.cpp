#include "shelby/reliability.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "shelby/errors.hpp"

namespace shelby {

namespace {

long double binomial(std::uint32_t n, std::uint32_t r) {
    if (r > n) return 0.0L;
    if (r > n - r) r = n - r;
    long double acc = 1.0L;
    for (std::uint32_t i = 1; i <= r; ++i) {
        acc = acc * (n - r + i) / i;
    }
    return acc;
}

} // namespace

double durability_loss_probability(const FailureModel& model) {
    if (model.n_nodes == 0 || model.m >= model.n_nodes) {
        throw_error(Errc::param, "durability: need 0 < m < n_nodes");
    }
    if (model.p_chunk_loss_on_trigger < 0.0 || model.p_chunk_loss_on_trigger > 1.0) {
        throw_error(Errc::param, "durability: loss probability outside [0, 1]");
    }
    if (model.t_critical_hours() < 0.0 || model.trigger_rate < 0.0) {
        throw_error(Errc::param, "durability: negative rate or window");
    }
    const long double p = model.p_chunk_loss_on_trigger;
    const long double window = p * model.t_critical_hours() / 8760.0L;
    const long double lead = model.n_nodes * model.trigger_rate * p;
    const long double tail =
        binomial(model.n_nodes - 1, model.m) * std::pow(window, (long double)model.m);
    return static_cast<double>(lead * tail);
}

double availability_loss_probability(const AvailabilityModel& model) {
    if (model.min_dcs_required > model.dc_count) {
        throw_error(Errc::param, "availability: min_dcs_required exceeds dc_count");
    }
    if (model.dc_uptime < 0.0 || model.dc_uptime > 1.0) {
        throw_error(Errc::param, "availability: uptime outside [0, 1]");
    }
    const long double u = model.dc_uptime;
    long double enough_dcs = 0.0L;
    for (std::uint32_t j = model.min_dcs_required; j <= model.dc_count; ++j) {
        enough_dcs += binomial(model.dc_count, j) * std::pow(u, (long double)j) *
                      std::pow(1.0L - u, (long double)(model.dc_count - j));
    }
    const long double systemic = model.systemic_outage_minutes_per_year / 525600.0L;
    return static_cast<double>(model.p_data_loss + systemic + (1.0L - enough_dcs));
}

FailureRateTable failure_rate_table() {
    return FailureRateTable{};
}

std::string reliability_table_csv() {
    std::string out =
        "kind,n_nodes,m,p_loss_on_trigger,mttd_h,mttr_h,dc_count,dc_uptime,min_dcs,"
        "systemic_min,probability,nines\n";
    char line[256];

    FailureModel d;
    for (std::uint32_t m : {4u, 5u, 6u, 7u, 8u}) {
        for (double p : {0.25, 0.5, 0.75, 1.0}) {
            d.m = m;
            d.p_chunk_loss_on_trigger = p;
            const double loss = durability_loss_probability(d);
            std::snprintf(line, sizeof(line), "durability,%u,%u,%.2f,%.0f,%.0f,,,,,%.6e,%.2f\n",
                          d.n_nodes, m, p, d.mttd_hours, d.mttr_rebuild_hours, loss,
                          loss > 0 ? -std::log10(loss) : 99.0);
            out += line;
        }
    }

    AvailabilityModel a;
    a.p_data_loss = durability_loss_probability(FailureModel{});
    for (double uptime : {0.95, 0.98, 0.99}) {
        for (std::uint32_t min_dcs : {2u, 3u, 4u}) {
            a.dc_uptime = uptime;
            a.min_dcs_required = min_dcs;
            const double loss = availability_loss_probability(a);
            std::snprintf(line, sizeof(line), "availability,,,,,,%u,%.2f,%u,%.0f,%.6e,%.2f\n",
                          a.dc_count, uptime, min_dcs, a.systemic_outage_minutes_per_year, loss,
                          loss > 0 ? -std::log10(loss) : 99.0);
            out += line;
        }
    }
    return out;
}

std::string reliability_report_json() {
    const FailureModel d;
    const AvailabilityModel a = [] {
        AvailabilityModel m;
        m.p_data_loss = durability_loss_probability(FailureModel{});
        return m;
    }();
    const FailureRateTable rates;
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["default_durability"] = {
        {"n_nodes", d.n_nodes},
        {"m", d.m},
        {"p_chunk_loss_on_trigger", d.p_chunk_loss_on_trigger},
        {"mttd_hours", d.mttd_hours},
        {"mttr_rebuild_hours", d.mttr_rebuild_hours},
        {"p_annual_data_loss", durability_loss_probability(d)},
    };
    j["default_availability"] = {
        {"dc_count", a.dc_count},
        {"dc_uptime", a.dc_uptime},
        {"min_dcs_required", a.min_dcs_required},
        {"systemic_outage_minutes_per_year", a.systemic_outage_minutes_per_year},
        {"p_unavailable", availability_loss_probability(a)},
    };
    j["failure_rates"] = {
        {"drive_afr", rates.drive_afr},
        {"latent_sector_lifetime", rates.latent_sector_lifetime},
        {"host_afr_low", rates.host_afr_low},
        {"host_afr_high", rates.host_afr_high},
        {"rack_afr", rates.rack_afr},
        {"datacenter_afr", rates.datacenter_afr},
        {"systemic_afr", rates.systemic_afr},
    };
    return j.dump(2);
}

} // namespace shelby
