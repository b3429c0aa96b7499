#include "linescan/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace linescan {

namespace {

std::string lowerExt(const std::string& path) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

std::vector<std::string> splitWs(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

double parseDouble(const std::string& tok, const std::string& path, int line) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        if (!std::isfinite(v)) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path, line, "expected a number, got '" + tok + "'");
    }
}

long parseLong(const std::string& tok, const std::string& path, int line) {
    long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw ParseError(path, line, "expected an integer, got '" + tok + "'");
    return v;
}

void dropDegenerate(TriangleMesh& mesh) {
    std::vector<std::array<int, 3>> kept;
    kept.reserve(mesh.triangles.size());
    for (const auto& tri : mesh.triangles) {
        const Vec3& a = mesh.vertices[tri[0]];
        const Vec3& b = mesh.vertices[tri[1]];
        const Vec3& c = mesh.vertices[tri[2]];
        if (0.5 * (b - a).cross(c - a).norm() > 1e-12) kept.push_back(tri);
    }
    mesh.triangles = std::move(kept);
}

void fanTriangulate(TriangleMesh& mesh, const std::vector<int>& face,
                    const std::string& path, int line) {
    if (face.size() < 3) throw ParseError(path, line, "face with fewer than 3 vertices");
    const int nverts = static_cast<int>(mesh.vertices.size());
    for (int idx : face) {
        if (idx < 0 || idx >= nverts)
            throw ParseError(path, line,
                             "vertex index " + std::to_string(idx) + " out of range");
    }
    for (std::size_t i = 1; i + 1 < face.size(); ++i)
        mesh.triangles.push_back({face[0], face[i], face[i + 1]});
}

}  // namespace

TriangleMesh loadMeshObj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    TriangleMesh mesh;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = splitWs(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks[0] == "v") {
            if (toks.size() < 4) throw ParseError(path, lineno, "vertex needs 3 coordinates");
            mesh.vertices.emplace_back(parseDouble(toks[1], path, lineno),
                                       parseDouble(toks[2], path, lineno),
                                       parseDouble(toks[3], path, lineno));
        } else if (toks[0] == "f") {
            std::vector<int> face;
            for (std::size_t i = 1; i < toks.size(); ++i) {
                std::string head = toks[i].substr(0, toks[i].find('/'));
                long raw = parseLong(head, path, lineno);
                if (raw == 0)
                    throw ParseError(path, lineno, "OBJ face index 0 (indices are 1-based)");
                long idx = raw > 0 ? raw - 1 : static_cast<long>(mesh.vertices.size()) + raw;
                face.push_back(static_cast<int>(idx));
            }
            fanTriangulate(mesh, face, path, lineno);
        }
        // vn / vt / usemtl / o / g / s are ignored.
    }
    dropDegenerate(mesh);
    return mesh;
}

namespace {

struct PlyProperty {
    std::string name;
    bool is_list = false;
};

struct PlyElement {
    std::string name;
    long count = 0;
    std::vector<PlyProperty> properties;
};

struct PlyHeader {
    std::vector<PlyElement> elements;
    int header_lines = 0;
};

PlyHeader readPlyHeader(std::ifstream& in, const std::string& path) {
    PlyHeader hdr;
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
    ++lineno;
    if (splitWs(line) != std::vector<std::string>{"ply"})
        throw ParseError(path, lineno, "missing 'ply' magic");
    bool format_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = splitWs(line);
        if (toks.empty() || toks[0] == "comment" || toks[0] == "obj_info") continue;
        if (toks[0] == "format") {
            if (toks.size() < 2 || toks[1] != "ascii")
                throw ParseError(path, lineno, "only ascii PLY is supported");
            format_seen = true;
        } else if (toks[0] == "element") {
            if (toks.size() < 3) throw ParseError(path, lineno, "malformed element");
            hdr.elements.push_back({toks[1], parseLong(toks[2], path, lineno), {}});
        } else if (toks[0] == "property") {
            if (hdr.elements.empty() || toks.size() < 3)
                throw ParseError(path, lineno, "property outside element");
            PlyProperty prop;
            prop.is_list = toks[1] == "list";
            prop.name = toks.back();
            hdr.elements.back().properties.push_back(prop);
        } else if (toks[0] == "end_header") {
            if (!format_seen) throw ParseError(path, lineno, "missing format line");
            hdr.header_lines = lineno;
            return hdr;
        } else {
            throw ParseError(path, lineno, "unknown header keyword '" + toks[0] + "'");
        }
    }
    throw ParseError(path, lineno, "unterminated header");
}

struct PlyData {
    PointCloud cloud;
    std::vector<std::pair<std::vector<int>, int>> faces;  // face, source line
};

PlyData readPlyAscii(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    PlyHeader hdr = readPlyHeader(in, path);

    PlyData out;
    std::string line;
    int lineno = hdr.header_lines;
    for (const auto& elem : hdr.elements) {
        int xi = -1, yi = -1, zi = -1, nxi = -1, nyi = -1, nzi = -1;
        for (std::size_t p = 0; p < elem.properties.size(); ++p) {
            const auto& name = elem.properties[p].name;
            if (name == "x") xi = static_cast<int>(p);
            if (name == "y") yi = static_cast<int>(p);
            if (name == "z") zi = static_cast<int>(p);
            if (name == "nx") nxi = static_cast<int>(p);
            if (name == "ny") nyi = static_cast<int>(p);
            if (name == "nz") nzi = static_cast<int>(p);
        }
        bool is_vertex = elem.name == "vertex";
        bool is_face = elem.name == "face";
        if (is_vertex && (xi < 0 || yi < 0 || zi < 0))
            throw ParseError(path, lineno, "vertex element missing x/y/z");
        for (long i = 0; i < elem.count; ++i) {
            if (!std::getline(in, line)) throw ParseError(path, lineno + 1, "unexpected EOF");
            ++lineno;
            auto toks = splitWs(line);
            if (is_vertex) {
                if (toks.size() < elem.properties.size())
                    throw ParseError(path, lineno, "short vertex row");
                out.cloud.points.emplace_back(parseDouble(toks[xi], path, lineno),
                                              parseDouble(toks[yi], path, lineno),
                                              parseDouble(toks[zi], path, lineno));
                if (nxi >= 0 && nyi >= 0 && nzi >= 0)
                    out.cloud.normals.emplace_back(parseDouble(toks[nxi], path, lineno),
                                                   parseDouble(toks[nyi], path, lineno),
                                                   parseDouble(toks[nzi], path, lineno));
            } else if (is_face) {
                if (toks.empty()) throw ParseError(path, lineno, "empty face row");
                long n = parseLong(toks[0], path, lineno);
                if (static_cast<long>(toks.size()) < n + 1)
                    throw ParseError(path, lineno, "short face row");
                std::vector<int> face;
                for (long v = 1; v <= n; ++v)
                    face.push_back(static_cast<int>(parseLong(toks[v], path, lineno)));
                out.faces.emplace_back(std::move(face), lineno);
            }
            // other elements: row consumed and ignored
        }
    }
    if (!out.cloud.normals.empty() && out.cloud.normals.size() != out.cloud.points.size())
        out.cloud.normals.clear();
    return out;
}

}  // namespace

TriangleMesh loadMeshPly(const std::string& path) {
    PlyData data = readPlyAscii(path);
    TriangleMesh mesh;
    mesh.vertices = std::move(data.cloud.points);
    for (const auto& [face, lineno] : data.faces) fanTriangulate(mesh, face, path, lineno);
    dropDegenerate(mesh);
    return mesh;
}

TriangleMesh loadMesh(const std::string& path) {
    std::string ext = lowerExt(path);
    if (ext == "obj") return loadMeshObj(path);
    if (ext == "ply") return loadMeshPly(path);
    // Sniff: PLY files start with the magic, anything else is treated as OBJ.
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string first;
    std::getline(in, first);
    in.close();
    if (first.rfind("ply", 0) == 0) return loadMeshPly(path);
    return loadMeshObj(path);
}

PointCloud loadPointCloudPly(const std::string& path) {
    return readPlyAscii(path).cloud;
}

void writePointCloudPly(const std::string& path, const PointCloud& cloud,
                        const std::vector<Rgb>& colors) {
    if (!colors.empty() && colors.size() != cloud.size())
        throw std::invalid_argument("writePointCloudPly: color count mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    const bool with_normals = cloud.hasNormals();
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << cloud.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (with_normals) out << "property double nx\nproperty double ny\nproperty double nz\n";
    if (!colors.empty())
        out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "element face 0\nproperty list uchar int vertex_indices\nend_header\n";
    char buf[256];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        int n = std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", p.x(), p.y(), p.z());
        out.write(buf, n);
        if (with_normals) {
            const Vec3& nm = cloud.normals[i];
            n = std::snprintf(buf, sizeof buf, " %.17g %.17g %.17g", nm.x(), nm.y(), nm.z());
            out.write(buf, n);
        }
        if (!colors.empty()) {
            n = std::snprintf(buf, sizeof buf, " %d %d %d", colors[i][0], colors[i][1],
                              colors[i][2]);
            out.write(buf, n);
        }
        out.put('\n');
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace linescan
