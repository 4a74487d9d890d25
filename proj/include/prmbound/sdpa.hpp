#pragma once

// Standard includes
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "prmbound/sdp.hpp"

namespace prmbound {

// SDPA sparse format. Matrix 0 is the objective C, matrices 1..m are the A_k,
// the rhs line holds b: min b^T y s.t. sum y_k A_k - C psd.
inline std::string format_sdpa(const SdpProblem& p) {
    p.validate();
    std::string out;
    char buf[128];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out += std::to_string(p.constraints.size()) + "\n";
    out += std::to_string(p.blocks.size()) + "\n";
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
        if (b) out += " ";
        out += std::to_string(p.blocks[b].diagonal ? -p.blocks[b].dim : p.blocks[b].dim);
    }
    out += "\n";
    for (std::size_t k = 0; k < p.rhs.size(); ++k) {
        if (k) out += " ";
        out += num(p.rhs[k]);
    }
    out += "\n";
    auto emit = [&](std::size_t matno, const SdpMatrix& m) {
        for (auto& e : m.entries) {
            if (e.value == 0) continue;
            out += std::to_string(matno) + " " + std::to_string(e.block + 1) + " " + std::to_string(e.row + 1) + " " +
                   std::to_string(e.col + 1) + " " + num(e.value) + "\n";
        }
    };
    emit(0, p.objective);
    for (std::size_t k = 0; k < p.constraints.size(); ++k) emit(k + 1, p.constraints[k]);
    return out;
}

inline void write_sdpa(const SdpProblem& p, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << format_sdpa(p);
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

inline SdpProblem parse_sdpa(const std::string& text) {
    std::istringstream in(text);
    std::string line, body;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            auto pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos) continue;
            if (line[pos] == '*' || line[pos] == '"') continue;
            header = false;
        }
        for (char& c : line)
            if (c == ',' || c == '{' || c == '}' || c == '(' || c == ')') c = ' ';
        body += line + "\n";
    }
    std::istringstream tok(body);
    auto fail = [](const std::string& what) { throw std::runtime_error("malformed SDPA data: " + what); };
    long m = -1, nb = -1;
    if (!(tok >> m) || m < 0) fail("constraint count");
    if (!(tok >> nb) || nb <= 0) fail("block count");
    SdpProblem p;
    for (long b = 0; b < nb; ++b) {
        long s;
        if (!(tok >> s) || s == 0) fail("block size");
        p.blocks.push_back({static_cast<int>(s < 0 ? -s : s), s < 0});
    }
    p.rhs.resize(m);
    for (long k = 0; k < m; ++k) {
        std::string v;
        if (!(tok >> v)) fail("rhs vector");
        try {
            p.rhs[k] = std::stod(v);
        } catch (...) {
            fail("rhs value '" + v + "'");
        }
    }
    p.constraints.resize(m);
    long matno, blk, i, j;
    std::string v;
    while (tok >> matno) {
        if (!(tok >> blk >> i >> j >> v)) fail("truncated entry");
        if (matno < 0 || matno > m) fail("matrix number out of range");
        if (blk < 1 || blk > nb) fail("block number out of range");
        const auto& b = p.blocks[blk - 1];
        if (i < 1 || j < 1 || i > b.dim || j > b.dim) fail("entry index out of range");
        if (b.diagonal && i != j) fail("off-diagonal entry in diagonal block");
        double val;
        try {
            val = std::stod(v);
        } catch (...) {
            fail("entry value '" + v + "'");
        }
        SdpMatrix& target = matno == 0 ? p.objective : p.constraints[matno - 1];
        target.add(static_cast<int>(blk - 1), static_cast<int>(i - 1), static_cast<int>(j - 1), val);
    }
    if (!tok.eof()) fail("trailing garbage");
    return p;
}

inline SdpProblem read_sdpa(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_sdpa(ss.str());
}

}  // namespace prmbound
