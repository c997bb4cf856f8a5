#include "hpmr/dataset.hpp"

#include "hpmr/error.hpp"

#include <cmath>
#include <ostream>

namespace hpmr::surrogate {

const std::vector<std::string>& dataset_columns() {
    static const std::vector<std::string> cols = {
        "x_ca",   "x_B10",      "x_fh",       "x_pp",   "x_e",    "x_cr",
        "x_mr",   "lifetime_y", "sdm_pcm",    "fq",     "fdh",    "qavg_mw_m2",
        "qmax_mw_m2", "itc_lo", "itc_hi",     "lcoe_foak_usd_mwh", "lcoe_noak_usd_mwh", "seed",
        "oracle_id"};
    return cols;
}

std::string to_string(Target t) {
    switch (t) {
        case Target::lifetime: return "lifetime_y";
        case Target::sdm: return "sdm_pcm";
        case Target::fdh: return "fdh";
        case Target::qmax: return "qmax_mw_m2";
    }
    return "?";
}

double value(const physics::QoIBundle& q, Target t) {
    switch (t) {
        case Target::lifetime: return q.lifetime_y;
        case Target::sdm: return q.sdm_pcm;
        case Target::fdh: return q.fdh;
        case Target::qmax: return q.q_max_mw_m2;
    }
    return NAN;
}

Dataset filter_outliers(Dataset raw, FilterReport* report) {
    FilterReport rep;
    rep.raw = raw.rows.size();
    Dataset out;
    out.meta = std::move(raw.meta);
    for (auto& s : raw.rows) {
        if (!s.qoi.finite()) {
            ++rep.non_finite;
            continue;
        }
        if (s.lcoe_foak < 0.0 || s.lcoe_noak < 0.0) {
            ++rep.negative_cost;
            continue;
        }
        out.rows.push_back(std::move(s));
    }
    rep.retained = out.rows.size();
    if (report) *report = rep;
    if (out.rows.empty()) throw DomainError("outlier filter removed every row");
    return out;
}

void write_dataset(std::ostream& out, const Dataset& d) {
    csv::write_meta(out, d.meta);
    const auto& cols = dataset_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& s : d.rows) {
        const auto& q = s.qoi;
        out << design::to_csv_row(s.design);
        for (double v : {q.lifetime_y, q.sdm_pcm, q.fq, q.fdh, q.q_avg_mw_m2, q.q_max_mw_m2, q.itc_low_pcm_k,
                         q.itc_high_pcm_k, s.lcoe_foak, s.lcoe_noak})
            out << ',' << csv::format(v);
        out << ',' << s.seed << ',' << s.oracle_id << '\n';
    }
}

Dataset parse_dataset(const csv::Table& t) {
    std::vector<std::size_t> idx;
    for (const auto& c : dataset_columns()) idx.push_back(t.column(c));
    Dataset d;
    d.meta = t.meta;
    for (const auto& row : t.rows) {
        const auto num = [&](std::size_t k) { return csv::parse_double(row[idx[k]]); };
        Sample s{};
        std::array<double, design::kNumParams> x{};
        for (std::size_t k = 0; k < design::kNumParams; ++k) x[k] = num(k);
        s.design = design::DesignPoint::from_array(x);
        s.qoi = {num(7), num(8), num(9), num(10), num(11), num(12), num(13), num(14)};
        s.lcoe_foak = num(15);
        s.lcoe_noak = num(16);
        s.seed = std::stoull(row[idx[17]]);
        s.oracle_id = row[idx[18]];
        d.rows.push_back(std::move(s));
    }
    return d;
}

Dataset read_dataset(const std::filesystem::path& path) { return parse_dataset(csv::read(path)); }

}  // namespace hpmr::surrogate
