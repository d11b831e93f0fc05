#pragma once

// Dataset ingestion and persistence: PHM12-style CSV snapshot files, linear
// RUL labeling, a seeded synthetic run-to-failure generator for desk-scale
// tests, and the binary/text model archives.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vispro/common.hpp"
#include "vispro/nsgpr.hpp"
#include "vispro/prosqn.hpp"
#include "vispro/tfa.hpp"

namespace vispro {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Domain records

struct BearingRun {
    std::string id;
    int condition = 1;
    std::vector<VibrationSnapshot> snapshots;
    std::optional<double> failure_time;     // t_f, run-to-failure only
    std::optional<double> truncation_time;  // t_c, testing runs only

    void validate(double cadence = 10.0) const {
        if (failure_time.has_value() == truncation_time.has_value()) {
            throw DataError("bearing " + id +
                            ": exactly one of failure/truncation time must be set");
        }
        for (std::size_t i = 1; i < snapshots.size(); ++i) {
            const double gap = snapshots[i].timestamp - snapshots[i - 1].timestamp;
            if (gap <= 0.0 || std::abs(gap - cadence) > 1.0) {
                throw DataError("bearing " + id + ": snapshot cadence broken at index " +
                                std::to_string(i));
            }
        }
    }
};

struct ManifestCondition {
    int condition = 1;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

struct DatasetManifest {
    fs::path root;
    double sample_rate = 25600.0;
    double cadence = 10.0;
    std::string channel = "horizontal";
    std::vector<ManifestCondition> conditions;
    fs::path truth_csv;  // optional; empty when absent

    bool is_training(const std::string& id) const {
        for (const auto& c : conditions) {
            for (const auto& b : c.train_ids) {
                if (b == id) return true;
            }
        }
        return false;
    }

    bool is_testing(const std::string& id) const {
        for (const auto& c : conditions) {
            for (const auto& b : c.test_ids) {
                if (b == id) return true;
            }
        }
        return false;
    }

    int condition_of(const std::string& id) const {
        for (const auto& c : conditions) {
            for (const auto& b : c.train_ids) {
                if (b == id) return c.condition;
            }
            for (const auto& b : c.test_ids) {
                if (b == id) return c.condition;
            }
        }
        throw DataError("bearing " + id + " is not listed in the manifest");
    }
};

// ---------------------------------------------------------------------------
// Manifest parsing (key=value lines, '#' comments)

inline std::map<std::string, std::string> parse_key_values(const std::string& text,
                                                           const std::string& origin) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        // trim
        const auto notspace = [](unsigned char c) { return !std::isspace(c); };
        line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
        line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw DataError(origin + ":" + std::to_string(line_no) +
                            ": expected key=value");
        }
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        if (!token.empty()) out.push_back(token);
    }
    return out;
}

inline DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    const auto kv = parse_key_values(text, path.string());

    DatasetManifest manifest;
    manifest.root = path.parent_path();
    std::map<int, ManifestCondition> conditions;
    for (const auto& [key, value] : kv) {
        if (key == "root") {
            manifest.root = fs::path(value).is_absolute() ? fs::path(value)
                                                          : path.parent_path() / value;
        } else if (key == "sample_rate") {
            manifest.sample_rate = std::stod(value);
        } else if (key == "cadence") {
            manifest.cadence = std::stod(value);
        } else if (key == "channel") {
            if (value != "horizontal" && value != "vertical") {
                throw DataError("manifest: channel must be horizontal or vertical");
            }
            manifest.channel = value;
        } else if (key == "truth") {
            manifest.truth_csv = fs::path(value).is_absolute()
                                     ? fs::path(value)
                                     : path.parent_path() / value;
        } else if (key.rfind("condition.", 0) == 0) {
            const std::size_t dot = key.find('.', 10);
            if (dot == std::string::npos) throw DataError("manifest: bad key " + key);
            const int cond = std::stoi(key.substr(10, dot - 10));
            const std::string role = key.substr(dot + 1);
            conditions[cond].condition = cond;
            if (role == "train") {
                conditions[cond].train_ids = split_list(value);
            } else if (role == "test") {
                conditions[cond].test_ids = split_list(value);
            } else {
                throw DataError("manifest: bad key " + key);
            }
        } else {
            throw DataError("manifest: unknown key " + key);
        }
    }
    for (auto& [cond, entry] : conditions) manifest.conditions.push_back(entry);

    for (const auto& c : manifest.conditions) {
        for (const auto& id : c.train_ids) {
            if (manifest.is_testing(id)) {
                throw DataError("manifest: bearing " + id + " is both train and test");
            }
        }
    }
    if (!(manifest.sample_rate > 0.0)) throw DataError("manifest: sample_rate must be > 0");
    return manifest;
}

// ---------------------------------------------------------------------------
// Snapshot CSV files. Default row shape: hour, minute, second, microsecond,
// horizontal acceleration, vertical acceleration. Alternate layouts plug in
// through RowFormat.

struct RowFormat {
    int min_columns = 6;
    int horizontal_column = 4;
    int vertical_column = 5;
};

inline VibrationSnapshot parse_snapshot_csv(const fs::path& file, double timestamp,
                                            double sample_rate, int expected_samples,
                                            const std::string& channel,
                                            const RowFormat& format = {}) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open snapshot file: " + file.string());
    const int column = channel == "vertical" ? format.vertical_column
                                             : format.horizontal_column;
    VibrationSnapshot snapshot;
    snapshot.timestamp = timestamp;
    snapshot.sample_rate = sample_rate;
    snapshot.samples.reserve(static_cast<std::size_t>(expected_samples));

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        int col = 0;
        std::size_t pos = 0;
        double value = 0.0;
        bool found = false;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            if (col == column) {
                try {
                    value = std::stod(line.substr(pos, comma - pos));
                } catch (const std::exception&) {
                    throw DataError(file.string() + ":" + std::to_string(line_no) +
                                    ": malformed value");
                }
                found = true;
                break;
            }
            ++col;
            pos = comma + 1;
        }
        if (!found || col + 1 > format.min_columns) {
            throw DataError(file.string() + ":" + std::to_string(line_no) +
                            ": too few columns");
        }
        snapshot.samples.push_back(value);
    }
    if (static_cast<int>(snapshot.samples.size()) != expected_samples) {
        throw DataError(file.string() + ": expected " + std::to_string(expected_samples) +
                        " samples, found " + std::to_string(snapshot.samples.size()));
    }
    return snapshot;
}

inline BearingRun load_bearing(const DatasetManifest& manifest, const std::string& id,
                               const RowFormat& format = {}) {
    const bool training = manifest.is_training(id);
    if (!training && !manifest.is_testing(id)) {
        throw DataError("bearing " + id + " is not listed in the manifest");
    }
    const fs::path dir = manifest.root / ("Bearing" + id);
    if (!fs::is_directory(dir)) {
        throw DataError("bearing directory not found: " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
            entry.path().filename().string().rfind("acc_", 0) == 0) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no snapshot files in " + dir.string());

    const int expected = static_cast<int>(std::lround(manifest.sample_rate * 0.1));
    BearingRun run;
    run.id = id;
    run.condition = manifest.condition_of(id);
    run.snapshots.reserve(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        run.snapshots.push_back(parse_snapshot_csv(
            files[i], static_cast<double>(i) * manifest.cadence, manifest.sample_rate,
            expected, manifest.channel, format));
    }
    const double last = run.snapshots.back().timestamp;
    if (training) {
        run.failure_time = last;
    } else {
        run.truncation_time = last;
    }
    run.validate(manifest.cadence);
    return run;
}

// Linear labels for a run-to-failure recording: RUL(t) = t_f - t.
inline std::vector<std::pair<double, double>> label_rul(const BearingRun& run) {
    if (!run.failure_time) {
        throw UserError("label_rul: bearing " + run.id + " is not run-to-failure");
    }
    std::vector<std::pair<double, double>> labels;
    labels.reserve(run.snapshots.size());
    for (const VibrationSnapshot& s : run.snapshots) {
        labels.emplace_back(s.timestamp, *run.failure_time - s.timestamp);
    }
    return labels;
}

// ---------------------------------------------------------------------------
// Synthetic run-to-failure bearings. Signal phases: persistent base tones,
// then extra tones plus broadband noise growing after the degradation onset,
// plus impulsive bursts whose rate rises toward failure.

struct SyntheticSpec {
    std::uint64_t seed = 1;
    double lifetime = 2000.0;  // seconds; must be a multiple of the cadence
    double cadence = 10.0;
    double sample_rate = 25600.0;
    std::vector<double> base_tones = {4000.0};
    std::vector<double> wear_tones = {1800.0, 3800.0, 6000.0};
    double late_tone = 11800.0;
    double onset_fraction = 0.4;
    double impulse_rate_growth = 3.0;  // mean impulses per snapshot at end of life
    double noise_floor = 0.05;

    void validate() const {
        if (!(onset_fraction > 0.0) || !(onset_fraction < 1.0)) {
            throw UserError("synthetic spec: onset fraction must be in (0,1)");
        }
        if (!(cadence > 0.0) || !(lifetime > 0.0) ||
            std::abs(std::remainder(lifetime, cadence)) > 1e-9) {
            throw UserError("synthetic spec: lifetime must be a positive multiple of the cadence");
        }
        if (!(sample_rate > 0.0)) throw UserError("synthetic spec: bad sample rate");
    }
};

inline BearingRun generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const int n_snapshots = static_cast<int>(std::lround(spec.lifetime / spec.cadence)) + 1;
    const int n_samples = static_cast<int>(std::lround(spec.sample_rate * 0.1));

    BearingRun run;
    run.id = "synthetic";
    run.failure_time = spec.lifetime;
    run.snapshots.reserve(static_cast<std::size_t>(n_snapshots));

    for (int i = 0; i < n_snapshots; ++i) {
        const double t = static_cast<double>(i) * spec.cadence;
        const double life_frac = t / spec.lifetime;
        const double progress =
            std::max(0.0, (life_frac - spec.onset_fraction) / (1.0 - spec.onset_fraction));

        VibrationSnapshot snapshot;
        snapshot.timestamp = t;
        snapshot.sample_rate = spec.sample_rate;
        snapshot.samples.assign(static_cast<std::size_t>(n_samples), 0.0);

        struct Tone {
            double freq, amp, phase;
        };
        std::vector<Tone> tones;
        for (const double f : spec.base_tones) {
            tones.push_back({f, 1.0, uniform(rng, 0.0, 2.0 * M_PI)});
        }
        for (const double f : spec.wear_tones) {
            tones.push_back({f, 0.8 * progress, uniform(rng, 0.0, 2.0 * M_PI)});
        }
        tones.push_back({spec.late_tone,
                         life_frac > 0.75 ? 1.2 * (life_frac - 0.75) / 0.25 : 0.0,
                         uniform(rng, 0.0, 2.0 * M_PI)});

        const double sigma = spec.noise_floor * (1.0 + 9.0 * progress * progress);
        for (int j = 0; j < n_samples; ++j) {
            double v = 0.0;
            const double tj = static_cast<double>(j) / spec.sample_rate;
            for (const Tone& tone : tones) {
                if (tone.amp > 0.0) {
                    v += tone.amp * std::sin(2.0 * M_PI * tone.freq * tj + tone.phase);
                }
            }
            v += sigma * normal(rng);
            snapshot.samples[j] = v;
        }

        const int impulses = poisson(rng, spec.impulse_rate_growth * progress * progress);
        for (int k = 0; k < impulses; ++k) {
            const int at = static_cast<int>(uniform_index(rng, n_samples - 8));
            const double amp = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * uniform(rng, 5.0, 10.0);
            for (int w = 0; w < 6; ++w) {
                snapshot.samples[at + w] += amp * std::exp(-0.8 * w);
            }
        }
        run.snapshots.push_back(std::move(snapshot));
    }
    run.validate(spec.cadence);
    return run;
}

// Keep snapshots up to t_c and relabel the run as a truncated testing run.
inline BearingRun truncate_run(const BearingRun& source, double t_c) {
    BearingRun run;
    run.id = source.id;
    run.condition = source.condition;
    for (const VibrationSnapshot& s : source.snapshots) {
        if (s.timestamp <= t_c + 1e-9) run.snapshots.push_back(s);
    }
    if (run.snapshots.empty()) {
        throw UserError("truncate_run: no snapshots before t_c");
    }
    run.truncation_time = run.snapshots.back().timestamp;
    return run;
}

// ---------------------------------------------------------------------------
// Snapshot CSV writing (PHM12-style layout), used to materialize synthetic
// datasets the ingestion path can read back.

inline void write_bearing_csv(const BearingRun& run, const fs::path& data_root) {
    const fs::path dir = data_root / ("Bearing" + run.id);
    fs::create_directories(dir);
    char name[32];
    for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
        const VibrationSnapshot& s = run.snapshots[i];
        std::snprintf(name, sizeof name, "acc_%05zu.csv", i + 1);
        std::string body;
        body.reserve(s.samples.size() * 40);
        const long t = std::lround(s.timestamp);
        const long hour = t / 3600, minute = (t % 3600) / 60, second = t % 60;
        char row[96];
        for (std::size_t j = 0; j < s.samples.size(); ++j) {
            const long micros = std::lround(1e6 * static_cast<double>(j) / s.sample_rate);
            const double h = s.samples[j];
            std::snprintf(row, sizeof row, "%ld,%ld,%ld,%ld,%.6f,%.6f\n", hour, minute,
                          second, micros, h, 0.5 * h);
            body += row;
        }
        detail::write_file_bytes((dir / name).string(), body);
    }
}

// ---------------------------------------------------------------------------
// Model archive: magic "VSPR", u32 LE version, then a count-prefixed sequence
// of named sections; each section is name length (u16 LE) + UTF-8 name +
// rank (u8) + dims (u32 LE each) + payload of f32 LE values.

namespace detail {

struct Section {
    std::string name;
    std::vector<int> dims;  // empty for scalars
    std::vector<float> values;
};

inline std::string encode_archive(const std::vector<Section>& sections) {
    std::string out;
    out.append("VSPR", 4);
    put_u32_le(out, 1);
    put_u32_le(out, static_cast<std::uint32_t>(sections.size()));
    for (const Section& s : sections) {
        if (s.name.size() > 0xffff) throw UserError("archive: section name too long");
        out.push_back(static_cast<char>(s.name.size() & 0xff));
        out.push_back(static_cast<char>((s.name.size() >> 8) & 0xff));
        out.insert(out.end(), s.name.begin(), s.name.end());
        out.push_back(static_cast<char>(s.dims.size()));
        long count = 1;
        for (const int d : s.dims) {
            put_u32_le(out, static_cast<std::uint32_t>(d));
            count *= d;
        }
        if (count != static_cast<long>(s.values.size())) {
            throw UserError("archive: section " + s.name + " payload size mismatch");
        }
        for (const float v : s.values) put_f32_le(out, v);
    }
    return out;
}

inline std::vector<Section> decode_archive(const std::string& data) {
    ByteReader reader(data);
    if (reader.bytes(4) != "VSPR") throw FormatError("archive: bad magic");
    const std::uint32_t version = reader.u32();
    if (version != 1) {
        throw FormatError("archive: unsupported version " + std::to_string(version));
    }
    const std::uint32_t count = reader.u32();
    std::vector<Section> sections;
    sections.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Section s;
        const std::uint16_t name_len = reader.u16();
        s.name = reader.bytes(name_len);
        const std::uint8_t rank = reader.u8();
        if (rank > 4) throw FormatError("archive: section " + s.name + " has rank > 4");
        long n = 1;
        for (int d = 0; d < rank; ++d) {
            const std::uint32_t dim = reader.u32();
            if (dim == 0) throw FormatError("archive: zero dimension in " + s.name);
            s.dims.push_back(static_cast<int>(dim));
            n *= dim;
        }
        s.values.resize(static_cast<std::size_t>(n));
        for (float& v : s.values) v = reader.f32();
        sections.push_back(std::move(s));
    }
    return sections;
}

}  // namespace detail

inline void save_prosqn(const ProSqnNet<float>& net, const fs::path& path) {
    std::vector<detail::Section> sections;
    auto scalar = [&sections](const std::string& name, float v) {
        sections.push_back({name, {}, {v}});
    };
    scalar("meta.width_divisor", static_cast<float>(net.width_divisor));
    scalar("meta.slope", net.slope);
    scalar("meta.t_ref", net.t_ref);
    scalar("meta.rul_scale", net.rul_scale);

    const auto params = net.parameters();
    const auto names = net.parameter_names();
    for (std::size_t i = 0; i < params.size(); ++i) {
        sections.push_back({names[i], params[i]->shape, params[i]->data});
    }
    detail::write_file_bytes(path.string(), detail::encode_archive(sections));
}

inline ProSqnNet<float> load_prosqn(const fs::path& path) {
    const auto sections = detail::decode_archive(detail::read_file_bytes(path.string()));
    std::map<std::string, const detail::Section*> by_name;
    for (const auto& s : sections) by_name[s.name] = &s;

    auto scalar = [&by_name, &path](const std::string& name) {
        const auto it = by_name.find(name);
        if (it == by_name.end() || it->second->values.size() != 1) {
            throw FormatError("archive " + path.string() + ": missing scalar " + name);
        }
        return it->second->values[0];
    };

    ProSqnNet<float> net =
        build_prosqn<float>(0, static_cast<int>(scalar("meta.width_divisor")));
    net.slope = scalar("meta.slope");
    net.t_ref = scalar("meta.t_ref");
    net.rul_scale = scalar("meta.rul_scale");

    const auto params = net.parameters();
    const auto names = net.parameter_names();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto it = by_name.find(names[i]);
        if (it == by_name.end()) {
            throw FormatError("archive " + path.string() + ": missing tensor " + names[i]);
        }
        if (it->second->dims != params[i]->shape) {
            throw FormatError("archive " + path.string() + ": tensor " + names[i] +
                              " has unexpected shape");
        }
        params[i]->data = it->second->values;
    }
    return net;
}

inline void save_gpr(const GprModel& model, const fs::path& path) {
    detail::write_file_bytes(path.string(), gpr_to_text(model));
}

inline GprModel load_gpr(const fs::path& path) {
    return gpr_from_text(detail::read_file_bytes(path.string()));
}

}  // namespace vispro
