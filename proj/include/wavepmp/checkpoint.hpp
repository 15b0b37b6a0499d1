#pragma once

#include "wavepmp/common.hpp"
#include "wavepmp/network.hpp"
#include "wavepmp/waves.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace wavepmp {

/// Versioned text checkpoint holding the layer parameters, the wave field and
/// the step counter. Values are written with 17 significant digits so doubles
/// round-trip exactly. Loading rejects any other schema version.
inline constexpr const char* kCheckpointMagic = "wavepmp.checkpoint.v1";

namespace detail {
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace detail

inline void save_checkpoint(const std::string& path, const NetworkSpec& net,
                            const WaveField& field, long step) {
    std::ofstream out(path);
    if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
    out << kCheckpointMagic << "\n";
    out << "step " << step << "\n";
    out << "layers " << net.depth() << "\n";
    for (int k = 0; k < net.depth(); ++k) {
        const Vector p = net.layers[k]->params();
        out << "layer " << k << " params " << p.size() << "\n";
        for (Eigen::Index i = 0; i < p.size(); ++i)
            out << detail::fmt17(p[i]) << (i + 1 == p.size() ? "" : " ");
        out << "\n";
    }
    out << "nodes " << field.nodes() << " batch " << field.batch() << "\n";
    auto write_block = [&](const char* tag, const Matrix& m) {
        out << tag << " " << m.rows() << " " << m.cols() << "\n";
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                out << detail::fmt17(m(i, j)) << (j + 1 == m.cols() ? "" : " ");
            out << "\n";
        }
    };
    for (int k = 0; k < field.nodes(); ++k) {
        write_block("wplus", field.plus[k]);
        write_block("wminus", field.minus[k]);
    }
    if (!out) throw CheckpointError("checkpoint write failed: " + path);
}

struct LoadedCheckpoint {
    std::vector<Vector> params;
    WaveField field;
    long step = 0;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
    std::string magic;
    std::getline(in, magic);
    if (magic != kCheckpointMagic)
        throw CheckpointError("checkpoint schema mismatch: expected '" +
                              std::string(kCheckpointMagic) + "', got '" + magic + "'");
    LoadedCheckpoint ck;
    std::string word;
    auto expect = [&](const std::string& tag) {
        in >> word;
        if (word != tag) throw CheckpointError("checkpoint parse error near '" + word + "'");
    };
    expect("step");
    in >> ck.step;
    expect("layers");
    int layers = 0;
    in >> layers;
    ck.params.resize(layers);
    for (int k = 0; k < layers; ++k) {
        expect("layer");
        int idx = 0, m = 0;
        in >> idx;
        expect("params");
        in >> m;
        Vector p(m);
        for (int i = 0; i < m; ++i) in >> p[i];
        ck.params[idx] = std::move(p);
    }
    expect("nodes");
    int nodes = 0, batch = 0;
    in >> nodes;
    expect("batch");
    in >> batch;
    auto read_block = [&](const char* tag) {
        expect(tag);
        Eigen::Index r = 0, c = 0;
        in >> r >> c;
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) in >> m(i, j);
        return m;
    };
    for (int k = 0; k < nodes; ++k) {
        ck.field.plus.push_back(read_block("wplus"));
        ck.field.minus.push_back(read_block("wminus"));
    }
    ck.field.step = ck.step;
    if (!in) throw CheckpointError("checkpoint truncated: " + path);
    return ck;
}

/// Apply loaded parameters to a structurally matching network.
inline void restore_params(NetworkSpec& net, const LoadedCheckpoint& ck) {
    require(static_cast<int>(ck.params.size()) == net.depth(),
            "checkpoint: layer count mismatch");
    for (int k = 0; k < net.depth(); ++k) net.layers[k]->set_params(ck.params[k]);
}

}  // namespace wavepmp
