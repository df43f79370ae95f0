#include "fds/container.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "fds/rng.hpp"

namespace fds {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
}

void write_file_atomic(const std::string& path, const std::string& header_line,
                       const void* payload, std::size_t payload_bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out.write(header_line.data(), static_cast<std::streamsize>(header_line.size()));
        out.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string make_header_line(const std::string& dtype, const std::vector<std::size_t>& shape,
                             nlohmann::json extra) {
    extra["dtype"] = dtype;
    extra["shape"] = shape;
    return extra.dump() + "\n";
}

}  // namespace

void save_real_array(const std::string& path, const std::vector<Real>& data,
                     const std::vector<std::size_t>& shape, nlohmann::json extra) {
    if (data.size() != shape_product(shape))
        throw std::invalid_argument("save_real_array: data size does not match shape");
    std::vector<float> f32(data.begin(), data.end());
    write_file_atomic(path, make_header_line("f32le", shape, std::move(extra)), f32.data(),
                      f32.size() * sizeof(float));
}

void save_complex_array(const std::string& path, const std::vector<Complex>& data,
                        const std::vector<std::size_t>& shape, nlohmann::json extra) {
    if (data.size() != shape_product(shape))
        throw std::invalid_argument("save_complex_array: data size does not match shape");
    std::vector<float> f32;
    f32.reserve(2 * data.size());
    for (const auto& c : data) {
        f32.push_back(static_cast<float>(c.real()));
        f32.push_back(static_cast<float>(c.imag()));
    }
    write_file_atomic(path, make_header_line("c64le", shape, std::move(extra)), f32.data(),
                      f32.size() * sizeof(float));
}

LoadedArray load_array(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string header_line;
    if (!std::getline(in, header_line))
        throw std::runtime_error(path + ": missing header line");

    LoadedArray out;
    try {
        out.header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": header is not valid JSON: " + e.what());
    }
    if (!out.header.contains("dtype") || !out.header["dtype"].is_string())
        throw std::runtime_error(path + ": header field 'dtype' missing or not a string");
    if (!out.header.contains("shape") || !out.header["shape"].is_array())
        throw std::runtime_error(path + ": header field 'shape' missing or not a list");
    const std::string dtype = out.header["dtype"];
    for (const auto& s : out.header["shape"]) {
        if (!s.is_number_unsigned())
            throw std::runtime_error(path + ": header field 'shape' has a non-integer entry");
        out.shape.push_back(s.get<std::size_t>());
    }

    const std::size_t n = shape_product(out.shape);
    std::size_t elem_bytes;
    if (dtype == "f32le")
        elem_bytes = sizeof(float);
    else if (dtype == "c64le")
        elem_bytes = 2 * sizeof(float);
    else
        throw std::runtime_error(path + ": header field 'dtype' has unknown value '" + dtype + "'");

    std::vector<float> buf(n * elem_bytes / sizeof(float));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(n * elem_bytes));
    if (static_cast<std::size_t>(in.gcount()) != n * elem_bytes)
        throw std::runtime_error(path + ": payload shorter than header field 'shape' implies");
    char probe;
    if (in.read(&probe, 1))
        throw std::runtime_error(path + ": payload longer than header field 'shape' implies");

    if (dtype == "f32le") {
        out.real_data.assign(buf.begin(), buf.end());
    } else {
        out.complex_data.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            out.complex_data.emplace_back(buf[2 * i], buf[2 * i + 1]);
    }
    return out;
}

std::string file_content_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    char hex[32];
    std::snprintf(hex, sizeof(hex), "fnv64:%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void save_measurement(const std::string& path, const Measurement& m, nlohmann::json extra) {
    extra["pitch_um"] = m.sensor_pitch_um;
    save_real_array(path, m.image.raw(), {m.image.rows(), m.image.cols()}, std::move(extra));
}

Measurement load_measurement(const std::string& path) {
    LoadedArray a = load_array(path);
    if (a.shape.size() != 2)
        throw std::runtime_error(path + ": expected a 2D measurement, shape has " +
                                 std::to_string(a.shape.size()) + " dims");
    Measurement m;
    m.image = Array2D<Real>(a.shape[0], a.shape[1]);
    m.image.raw() = std::move(a.real_data);
    m.sensor_pitch_um = a.header.value("pitch_um", 0.0);
    return m;
}

void save_volume(const std::string& path, const Volume& v, nlohmann::json extra) {
    extra["pitch_um"] = v.lateral_pitch_um;
    extra["z_positions_um"] = v.z_positions_um;
    save_real_array(path, v.intensities.raw(),
                    {v.intensities.nz(), v.intensities.ny(), v.intensities.nx()},
                    std::move(extra));
}

Volume load_volume(const std::string& path) {
    LoadedArray a = load_array(path);
    if (a.shape.size() != 3)
        throw std::runtime_error(path + ": expected a 3D volume, shape has " +
                                 std::to_string(a.shape.size()) + " dims");
    Volume v;
    v.intensities = Array3D<Real>(a.shape[0], a.shape[1], a.shape[2]);
    v.intensities.raw() = std::move(a.real_data);
    v.lateral_pitch_um = a.header.value("pitch_um", 0.0);
    if (a.header.contains("z_positions_um"))
        v.z_positions_um = a.header["z_positions_um"].get<std::vector<double>>();
    return v;
}

void save_psf_stack(const std::string& path, const PSFStack& s, nlohmann::json extra) {
    if (s.kernels.empty()) throw std::invalid_argument("save_psf_stack: empty stack");
    const std::size_t ny = s.kernels[0].rows(), nx = s.kernels[0].cols();
    std::vector<Real> flat;
    flat.reserve(s.kernels.size() * ny * nx);
    for (const auto& k : s.kernels)
        flat.insert(flat.end(), k.raw().begin(), k.raw().end());
    extra["pitch_um"] = s.sensor_pitch_um;
    extra["z_positions_um"] = s.z_positions_um;
    save_real_array(path, flat, {s.kernels.size(), ny, nx}, std::move(extra));
}

PSFStack load_psf_stack(const std::string& path) {
    LoadedArray a = load_array(path);
    if (a.shape.size() != 3)
        throw std::runtime_error(path + ": expected a 3D PSF stack, shape has " +
                                 std::to_string(a.shape.size()) + " dims");
    PSFStack s;
    s.sensor_pitch_um = a.header.value("pitch_um", 0.0);
    if (!a.header.contains("z_positions_um"))
        throw std::runtime_error(path + ": header field 'z_positions_um' missing");
    s.z_positions_um = a.header["z_positions_um"].get<std::vector<double>>();
    if (s.z_positions_um.size() != a.shape[0])
        throw std::runtime_error(path + ": header field 'z_positions_um' length != depth count");
    const std::size_t ny = a.shape[1], nx = a.shape[2];
    for (std::size_t z = 0; z < a.shape[0]; ++z) {
        Array2D<Real> k(ny, nx);
        std::copy_n(a.real_data.begin() + static_cast<std::ptrdiff_t>(z * ny * nx), ny * nx,
                    k.raw().begin());
        s.kernels.push_back(std::move(k));
    }
    return s;
}

void save_surface(const std::string& path, const DiffuserSurface& s, nlohmann::json extra) {
    extra["pitch_um"] = s.grid_pitch_um;
    extra["refractive_index"] = s.refractive_index;
    extra["layout"] = layout_name(s.layout_kind);
    extra["seed"] = s.rng_seed;
    extra["aperture_mm"] = s.aperture_mm;
    nlohmann::json lens = nlohmann::json::array();
    for (const auto& l : s.lenslets)
        lens.push_back({{"cx_mm", l.center_xy_mm[0]},
                        {"cy_mm", l.center_xy_mm[1]},
                        {"focal_mm", l.focal_mm},
                        {"pitch_mm", l.pitch_mm}});
    extra["lenslets"] = std::move(lens);
    save_real_array(path, s.height_map_um.raw(),
                    {s.height_map_um.rows(), s.height_map_um.cols()}, std::move(extra));
}

DiffuserSurface load_surface(const std::string& path) {
    LoadedArray a = load_array(path);
    if (a.shape.size() != 2)
        throw std::runtime_error(path + ": expected a 2D surface, shape has " +
                                 std::to_string(a.shape.size()) + " dims");
    DiffuserSurface s;
    s.height_map_um = Array2D<Real>(a.shape[0], a.shape[1]);
    s.height_map_um.raw() = std::move(a.real_data);
    try {
        s.grid_pitch_um = a.header.at("pitch_um").get<double>();
        s.refractive_index = a.header.at("refractive_index").get<double>();
        s.layout_kind = layout_from_name(a.header.at("layout").get<std::string>());
        s.rng_seed = a.header.at("seed").get<std::uint64_t>();
        s.aperture_mm = a.header.at("aperture_mm").get<double>();
        for (const auto& l : a.header.at("lenslets")) {
            LensletSpec spec;
            spec.center_xy_mm = {l.at("cx_mm").get<double>(), l.at("cy_mm").get<double>()};
            spec.focal_mm = l.at("focal_mm").get<double>();
            spec.pitch_mm = l.at("pitch_mm").get<double>();
            s.lenslets.push_back(spec);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": bad surface header field: " + e.what());
    }
    return s;
}

}  // namespace fds
