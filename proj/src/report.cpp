#include "perish/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "perish/error.hpp"

namespace perish {

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double number_or_inf(const nlohmann::json& v) {
    return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

std::string g(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fixed(double v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

nlohmann::json series_to_json(const EffectivenessSeries& s) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : s.points) {
        points.push_back({
            {"train_period", p.train_period.to_string()},
            {"test_period", p.test_period.to_string()},
            {"delta_months", p.delta_months},
            {"delta_t_years", p.delta_t_years},
            {"native_size", p.native_size},
            {"effective_size", finite_or_null(p.effective_size)},
            {"effectiveness", finite_or_null(p.effectiveness)},
            {"extrapolated", p.extrapolated},
            {"noise", p.noise},
            {"saturated", p.saturated},
        });
    }
    return {{"topic", s.topic},
            {"backend_id", s.backend_id},
            {"reference_period", s.reference_period.to_string()},
            {"reference_size", s.reference_size},
            {"points", points},
            {"warnings", s.warnings}};
}

EffectivenessSeries series_from_json(const nlohmann::json& j) {
    try {
        EffectivenessSeries s;
        s.topic = j.at("topic").get<std::string>();
        s.backend_id = j.at("backend_id").get<std::string>();
        s.reference_period = PeriodId::parse(j.at("reference_period").get<std::string>());
        s.reference_size = j.at("reference_size").get<std::size_t>();
        for (const auto& p : j.at("points")) {
            EffectivenessPoint e;
            e.train_period = PeriodId::parse(p.at("train_period").get<std::string>());
            e.test_period = PeriodId::parse(p.at("test_period").get<std::string>());
            e.delta_months = p.at("delta_months").get<int>();
            e.delta_t_years = p.at("delta_t_years").get<double>();
            e.native_size = p.at("native_size").get<double>();
            e.effective_size = number_or_inf(p.at("effective_size"));
            e.effectiveness = number_or_inf(p.at("effectiveness"));
            e.extrapolated = p.at("extrapolated").get<bool>();
            e.noise = p.at("noise").get<bool>();
            e.saturated = p.at("saturated").get<bool>();
            s.points.push_back(e);
        }
        s.warnings = j.value("warnings", std::vector<std::string>{});
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed effectiveness series: ") + e.what());
    }
}

std::string render_curves_table(const CurveFitSet& fits) {
    std::ostringstream out;
    out << "topic,backend_id,train_period,test_period,a,b,c,r2_log,residual_sse,points,min_size,max_size\n";
    for (const auto& [key, f] : fits.fits) {
        out << key.topic << ',' << key.backend_id << ',' << key.train_period.to_string() << ','
            << key.test_period.to_string() << ',' << g(f.a) << ',' << g(f.b) << ',' << g(f.c) << ','
            << g(f.r2_log) << ',' << g(f.residual_sse) << ',' << f.point_count << ',' << g(f.min_size) << ','
            << g(f.max_size) << '\n';
    }
    return out.str();
}

std::string render_series_table(const EffectivenessSeries& s) {
    std::ostringstream out;
    out << "train_period,test_period,delta_months,delta_t_years,native_size,effective_size,effectiveness,"
           "extrapolated,noise,saturated\n";
    for (const auto& p : s.points) {
        out << p.train_period.to_string() << ',' << p.test_period.to_string() << ',' << p.delta_months << ','
            << g(p.delta_t_years) << ',' << g(p.native_size) << ',' << g(p.effective_size) << ','
            << g(p.effectiveness) << ',' << int(p.extrapolated) << ',' << int(p.noise) << ','
            << int(p.saturated) << '\n';
    }
    return out.str();
}

std::string render_forms_table(std::span<const TopicForms> rows) {
    std::ostringstream out;
    out << "topic,verdict,exp_sse,exp_r2,exp_points,pow_sse,pow_r2,pow_points\n";
    for (const auto& r : rows) {
        const auto& c = r.comparison;
        out << r.topic << ',' << to_string(c.verdict) << ',' << g(c.exp_sse) << ',' << g(c.exp_r2) << ','
            << c.exp_points << ',' << g(c.pow_sse) << ',' << g(c.pow_r2) << ',' << c.pow_points << '\n';
    }
    return out.str();
}

std::string with_config_hash(const std::string& csv, const std::string& config_hash) {
    return "# config_hash=" + config_hash + "\n" + csv;
}

std::string render_series_svg(std::span<const EffectivenessSeries> series, const std::string& title,
                              const std::string& config_hash) {
    constexpr double W = 720, H = 440, left = 70, right = 170, top = 40, bottom = 60;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    double x_max = 0.0, y_max = 1.0;
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            if (!std::isfinite(p.effectiveness)) continue;
            x_max = std::max(x_max, p.delta_t_years);
            y_max = std::max(y_max, p.effectiveness);
        }
    }
    if (x_max <= 0.0) x_max = 1.0;
    y_max = std::ceil(y_max * 10.0) / 10.0;
    const double pw = W - left - right, ph = H - top - bottom;
    auto sx = [&](double x) { return left + pw * x / x_max; };
    auto sy = [&](double y) { return top + ph * (1.0 - y / y_max); };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<!-- config_hash=" << config_hash << " -->\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
      << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
      << "</text>\n";
    // axes and ticks
    o << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x_max * i / 5.0, yv = y_max * i / 5.0;
        o << "<line x1=\"" << sx(xv) << "\" y1=\"" << top + ph << "\" x2=\"" << sx(xv) << "\" y2=\"" << top + ph + 5
          << "\" stroke=\"black\"/><text x=\"" << sx(xv) << "\" y=\"" << top + ph + 20
          << "\" text-anchor=\"middle\">" << fixed(xv, 2) << "</text>\n";
        o << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(yv) << "\" x2=\"" << left << "\" y2=\"" << sy(yv)
          << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << sy(yv) + 4
          << "\" text-anchor=\"end\">" << fixed(yv, 2) << "</text>\n";
    }
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">years since training period</text>\n"
      << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">effectiveness</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = colors[k % std::size(colors)];
        std::ostringstream pts;
        for (const auto& p : series[k].points) {
            if (!std::isfinite(p.effectiveness)) continue;
            pts << sx(p.delta_t_years) << ',' << sy(p.effectiveness) << ' ';
        }
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << pts.str()
          << "\"/>\n";
        for (const auto& p : series[k].points) {
            if (!std::isfinite(p.effectiveness)) continue;
            o << "<circle cx=\"" << sx(p.delta_t_years) << "\" cy=\"" << sy(p.effectiveness) << "\" r=\"3\" fill=\""
              << color << "\"/>\n";
        }
        const double ly = top + 10 + 18.0 * static_cast<double>(k);
        o << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 35 << "\" y2=\"" << ly
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4
          << "\">" << xml_escape(series[k].topic) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace perish
