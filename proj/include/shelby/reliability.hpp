#pragma once

#include <cstdint>
#include <string>

namespace shelby {

// Annual data-loss model: a trigger event (node crash or detected malicious
// action) strips one chunk, and the chunkset dies if m further chunks are
// destroyed within the critical window T_critical = MTTD + MTTR.
struct FailureModel {
    std::uint32_t n_nodes = 16;            // k + m chunk holders
    double trigger_rate = 1.0;             // trigger events / node / year
    double p_chunk_loss_on_trigger = 0.5;  // probability a trigger destroys the chunk
    double mttd_hours = 24.0;
    double mttr_rebuild_hours = 12.0;
    std::uint32_t m = 6;                   // tolerable further losses
    std::uint32_t k = 10;                  // required chunks

    [[nodiscard]] double t_critical_hours() const { return mttd_hours + mttr_rebuild_hours; }
};

struct AvailabilityModel {
    std::uint32_t dc_count = 5;
    double dc_uptime = 0.98;
    std::uint32_t min_dcs_required = 3;
    double systemic_outage_minutes_per_year = 30.0;
    double p_data_loss = 0.0;
};

// P(annual data loss) =
//   n * trigger_rate * p * C(n-1, m) * (p * T_critical / 8760)^m
// evaluated in extended precision. With the default trigger_rate of one
// event per node-year this is exactly the leading-factor form of the
// (16 * 0.50) * [C(15,6) * (0.50 * 36/8760)^6] arithmetic.
double durability_loss_probability(const FailureModel& model);

// P(unavailable) = p_data_loss + systemic_minutes/525600
//                + P(fewer than min_dcs_required DCs online).
double availability_loss_probability(const AvailabilityModel& model);

// Documented hardware failure-rate defaults (annualized unless noted).
struct FailureRateTable {
    double drive_afr = 0.02;                    // drives, per year
    double latent_sector_lifetime = 0.0345;     // share of drives over lifetime
    double host_afr_low = 0.01;                 // hosts, per year (range low)
    double host_afr_high = 0.05;                // hosts, per year (range high)
    double rack_afr = 0.05;                     // racks, per year
    double datacenter_afr = 0.02;               // datacenters, per year
    double systemic_afr = 30.0 / 525600.0;      // one 30-minute event per year
};

FailureRateTable failure_rate_table();

// CSV durability/availability sweep used by the `reliability` subcommand.
std::string reliability_table_csv();
std::string reliability_report_json();

} // namespace shelby
