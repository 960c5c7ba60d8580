#include "neuroplan/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace neuroplan {

namespace {

[[noreturn]] void io_fail(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error(what + ": " + path.string());
}

} // namespace

Json workspace_to_json(const Workspace& ws) {
    Json j;
    j["dim"] = ws.dim;
    j["bounds"] = std::vector<double>(ws.bounds.begin(), ws.bounds.begin() + ws.dim);
    Json obs = Json::array();
    for (const auto& ob : ws.obstacles) {
        Json o;
        o["center"] = std::vector<double>(ob.center.begin(), ob.center.begin() + ws.dim);
        o["half_extents"] =
            std::vector<double>(ob.half_extents.begin(), ob.half_extents.begin() + ws.dim);
        obs.push_back(std::move(o));
    }
    j["obstacles"] = std::move(obs);
    j["seed"] = ws.seed;
    return j;
}

Workspace workspace_from_json(const Json& j) {
    Workspace ws;
    ws.dim = j.at("dim").get<int>();
    const auto b = j.at("bounds").get<std::vector<double>>();
    if (static_cast<int>(b.size()) != ws.dim)
        throw std::runtime_error("workspace json: bounds length != dim");
    for (int i = 0; i < ws.dim; ++i) ws.bounds[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)];
    for (const auto& o : j.at("obstacles")) {
        AabbObstacle ob;
        const auto c = o.at("center").get<std::vector<double>>();
        const auto h = o.at("half_extents").get<std::vector<double>>();
        if (static_cast<int>(c.size()) != ws.dim || static_cast<int>(h.size()) != ws.dim)
            throw std::runtime_error("workspace json: obstacle dims mismatch");
        for (int i = 0; i < ws.dim; ++i) {
            ob.center[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)];
            ob.half_extents[static_cast<std::size_t>(i)] = h[static_cast<std::size_t>(i)];
        }
        ws.obstacles.push_back(ob);
    }
    ws.seed = j.at("seed").get<std::uint64_t>();
    ws.validate();
    return ws;
}

void save_workspace(const Workspace& ws, const std::filesystem::path& path) {
    write_json_file(workspace_to_json(ws), path);
}

Workspace load_workspace(const std::filesystem::path& path) {
    return workspace_from_json(read_json_file(path));
}

void save_cloud_f32(const PointCloud& pc, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) io_fail(path, "cannot open for writing");
    const std::uint32_t n = static_cast<std::uint32_t>(pc.points.rows());
    const std::uint32_t dim = static_cast<std::uint32_t>(pc.dim);
    f.write(reinterpret_cast<const char*>(&n), 4);
    f.write(reinterpret_cast<const char*>(&dim), 4);
    std::vector<float> row(dim);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t k = 0; k < dim; ++k) row[k] = static_cast<float>(pc.points(i, k));
        f.write(reinterpret_cast<const char*>(row.data()), std::streamsize(4 * dim));
    }
    if (!f) io_fail(path, "write failed");
}

PointCloud load_cloud_f32(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) io_fail(path, "cannot open point cloud");
    std::uint32_t n = 0, dim = 0;
    f.read(reinterpret_cast<char*>(&n), 4);
    f.read(reinterpret_cast<char*>(&dim), 4);
    if (!f || (dim != 2 && dim != 3)) io_fail(path, "bad point cloud header");
    PointCloud pc;
    pc.dim = static_cast<int>(dim);
    pc.points.resize(n, dim);
    std::vector<float> row(dim);
    for (std::uint32_t i = 0; i < n; ++i) {
        f.read(reinterpret_cast<char*>(row.data()), std::streamsize(4 * dim));
        if (!f) io_fail(path, "truncated point cloud");
        for (std::uint32_t k = 0; k < dim; ++k) pc.points(i, k) = static_cast<double>(row[k]);
    }
    return pc;
}

void save_cloud_csv(const PointCloud& pc, const std::filesystem::path& path) {
    std::ostringstream out;
    out << (pc.dim == 2 ? "x,y\n" : "x,y,z\n");
    out.precision(9);
    for (int i = 0; i < pc.size(); ++i) {
        for (int k = 0; k < pc.dim; ++k) {
            if (k) out << ',';
            out << pc.points(i, k);
        }
        out << '\n';
    }
    write_text_file(out.str(), path);
}

Json path_to_json(const Path& path) {
    Json j = Json::array();
    for (const auto& q : path) {
        Json p = Json::array();
        for (int i = 0; i < q.dim; ++i) p.push_back(q[i]);
        j.push_back(std::move(p));
    }
    return j;
}

Path path_from_json(const Json& j, int dim) {
    Path path;
    for (const auto& p : j) {
        if (static_cast<int>(p.size()) != dim)
            throw std::runtime_error("path json: config dim mismatch");
        Config q;
        q.dim = dim;
        for (int i = 0; i < dim; ++i) q[i] = p[static_cast<std::size_t>(i)].get<double>();
        path.push_back(q);
    }
    return path;
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
    write_text_file(j.dump(2) + "\n", path);
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) io_fail(path, "cannot open json file");
    Json j;
    try {
        f >> j;
    } catch (const nlohmann::json::parse_error& e) {
        io_fail(path, std::string("json parse error: ") + e.what());
    }
    return j;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) io_fail(path, "cannot open file");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& text, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) io_fail(path, "cannot open for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) io_fail(path, "write failed");
}

std::uint64_t fnv1a_hash_file(const std::filesystem::path& path) {
    const std::string bytes = read_text_file(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace neuroplan
