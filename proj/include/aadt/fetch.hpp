#pragma once

// Templated HTTP GET collector for ATR hourly files. One request per station;
// each body is stored as <county>_<station>.csv. Failures are recorded per
// station and never abort the batch.

#include "aadt/csv.hpp"
#include "aadt/error.hpp"
#include "aadt/ingest.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace aadt {

struct FetchConfig {
    /// Placeholders: {station} (required), {county}, {year}.
    std::string url_template;
    double timeout_seconds = 30.0;
    std::size_t max_concurrent = 4;
};

/// key=value lines; '#' starts a comment.
inline FetchConfig parse_fetch_config(std::string_view text)
{
    FetchConfig cfg;
    bool have_template = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = csv::trim(text.substr(pos, end - pos));
        ++line_no;
        pos = end + 1;
        if (line.empty() || line.front() == '#') {
            if (end == text.size()) break;
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": expected key=value");
        auto key = csv::trim(line.substr(0, eq));
        auto value = csv::trim(line.substr(eq + 1));
        if (key == "url_template") {
            cfg.url_template = std::string(value);
            have_template = true;
        } else if (key == "timeout_seconds") {
            auto v = csv::parse_double(value);
            if (!v || *v <= 0) throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": timeout_seconds must be > 0");
            cfg.timeout_seconds = *v;
        } else if (key == "max_concurrent") {
            auto v = csv::parse_int(value);
            if (!v || *v < 1) throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": max_concurrent must be >= 1");
            cfg.max_concurrent = static_cast<std::size_t>(*v);
        } else {
            throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
        }
        if (end == text.size()) break;
    }
    if (!have_template) throw Error(Errc::BadConfig, "url_template is required");
    return cfg;
}

struct ResolvedUrl {
    std::string origin; // scheme://host[:port]
    std::string target; // path and query
};

/// Substitutes placeholders and splits the result into origin and request target.
inline ResolvedUrl expand_url_template(std::string_view tmpl, const StationKey& key, int year)
{
    if (tmpl.find("{station}") == std::string_view::npos)
        throw Error(Errc::InvalidTemplate, "url_template must contain {station}");

    std::string url;
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i);
            if (close == std::string_view::npos)
                throw Error(Errc::InvalidTemplate, "unterminated placeholder in '" + std::string(tmpl) + "'");
            auto name = tmpl.substr(i + 1, close - i - 1);
            if (name == "station") url += std::to_string(key.station);
            else if (name == "county") url += std::to_string(key.county);
            else if (name == "year") url += std::to_string(year);
            else throw Error(Errc::InvalidTemplate, "unknown placeholder {" + std::string(name) + "}");
            i = close + 1;
        } else {
            url += tmpl[i++];
        }
    }

    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw Error(Errc::InvalidTemplate, "url must start with http:// or https://");
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        throw Error(Errc::InvalidTemplate, "unsupported scheme '" + scheme + "'");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (scheme == "https") throw Error(Errc::InvalidTemplate, "https support was not compiled in");
#endif
    auto path_start = url.find('/', scheme_end + 3);
    ResolvedUrl out;
    out.origin = url.substr(0, path_start);
    out.target = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (out.origin.size() == scheme_end + 3) throw Error(Errc::InvalidTemplate, "url has no host");
    return out;
}

struct StationFetchResult {
    StationKey key;
    bool ok = false;
    std::filesystem::path file; // set when ok
    std::string error;          // set when !ok
};

struct FetchReport {
    std::vector<StationFetchResult> results; // same order as the input station list

    std::size_t succeeded() const
    {
        return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const auto& r) { return r.ok; }));
    }
    std::size_t failed() const { return results.size() - succeeded(); }
};

/// Called after each station completes with (stations_done, stations_total).
using FetchProgress = std::function<void(std::size_t, std::size_t)>;

inline FetchReport fetch_atr_data(const FetchConfig& cfg, const std::vector<AtrStationMeta>& stations, int year,
                                  const std::filesystem::path& out_dir, const FetchProgress& progress = {})
{
    // Validate once up front so a bad template fails the whole command.
    if (!stations.empty()) expand_url_template(cfg.url_template, stations.front().key, year);
    else if (cfg.url_template.find("{station}") == std::string::npos)
        throw Error(Errc::InvalidTemplate, "url_template must contain {station}");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (!std::filesystem::is_directory(out_dir))
        throw Error(Errc::IoError, "cannot create output directory " + out_dir.string());

    FetchReport report;
    report.results.resize(stations.size());
    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex progress_mutex;

    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(cfg.timeout_seconds));

    auto worker = [&] {
        for (std::size_t i = next++; i < stations.size(); i = next++) {
            StationFetchResult& result = report.results[i];
            result.key = stations[i].key;
            try {
                auto url = expand_url_template(cfg.url_template, result.key, year);
                httplib::Client client(url.origin);
                client.set_connection_timeout(timeout);
                client.set_read_timeout(timeout);
                client.set_follow_location(true);
                auto res = client.Get(url.target);
                if (!res) {
                    result.error = std::string(errc_name(Errc::NetworkError)) + ": " + httplib::to_string(res.error());
                } else if (res->status != 200) {
                    result.error = std::string(errc_name(Errc::NetworkError)) + ": HTTP " + std::to_string(res->status);
                } else {
                    auto path = out_dir / atr_file_name(result.key);
                    write_text_file(path, res->body);
                    result.file = path;
                    result.ok = true;
                }
            } catch (const std::exception& e) {
                result.error = e.what();
            }
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(++done, stations.size());
            }
        }
    };

    const std::size_t n_threads = std::max<std::size_t>(1, std::min(cfg.max_concurrent, stations.size()));
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    return report;
}

} // namespace aadt
