#!/usr/bin/env python3
"""Verification script for a smoothcert installation."""

import re
import sys
import importlib
from pathlib import Path

ROOT = Path(__file__).parent

# requirement name -> import name
IMPORT_NAMES = {"PyYAML": "yaml"}
RUNTIME_ONLY = {"pytest"}


def _version_tuple(text):
    return tuple(int(part) for part in re.findall(r"\d+", text)[:3])


def read_requirements(path=ROOT / "requirements.txt"):
    """(package, minimum version) pairs from requirements.txt."""
    pairs = []
    for line in path.read_text().splitlines():
        line = line.split("#")[0].strip()
        if not line:
            continue
        name, _, minimum = line.partition(">=")
        pairs.append((name.strip(), minimum.strip()))
    return pairs


def check_interpreter():
    info = sys.version_info
    found = f"{info.major}.{info.minor}.{info.micro}"
    if info[:2] < (3, 8):
        print(f"❌ Python {found}: smoothcert needs 3.8+")
        return False
    print(f"✅ Python {found}")
    return True


def check_packages():
    """Every requirement importable at its minimum version; pytest is optional."""
    ok = True
    for package, minimum in read_requirements():
        module_name = IMPORT_NAMES.get(package, package)
        try:
            module = importlib.import_module(module_name)
        except ImportError:
            if package in RUNTIME_ONLY:
                print(f"⚠️  {package}: not installed (needed for the test suite only)")
                continue
            print(f"❌ {package}: NOT INSTALLED")
            ok = False
            continue
        installed = getattr(module, "__version__", "")
        if minimum and installed and _version_tuple(installed) < _version_tuple(minimum):
            print(f"❌ {package}: {installed} is older than {minimum}")
            ok = False
        else:
            print(f"✅ {package}: {installed or 'unknown'}")
    return ok


def check_package_files():
    """Package modules from setup.py's package plus the reference data used by the tests."""
    package = ROOT / "smoothcert"
    modules = ["__init__", "main", "cli", "config", "database", "expressions", "errors",
               "special_functions", "distributions", "integrator", "bisection", "np_cert",
               "dsrs_cert", "lower_bound", "results", "tables", "simulation", "harness"]
    data = ["lambda_fixbase.csv", "lambda_thcorres.csv", "sigma_errors.csv", "egg_simulation.csv"]
    missing = [f"smoothcert/{m}.py" for m in modules if not (package / f"{m}.py").exists()]
    missing += [f"smoothcert/tests/data/{name}" for name in data if not (package / "tests" / "data" / name).exists()]
    if missing:
        for name in missing:
            print(f"❌ {name}: NOT FOUND")
        return False
    print(f"✅ {len(modules)} modules and {len(data)} reference tables present")
    return True


def check_numerics():
    """Spot-check the certifier against the Gaussian closed form."""
    try:
        from smoothcert.distributions import esg
        from smoothcert.np_cert import NpProblem, cohen_radius, np_certify
        radius = np_certify(NpProblem(esg(3072, 1.0, 2.0), 0.8, tol=1e-4)).radius
        target = cohen_radius(1.0, 0.8)
    except Exception as e:
        print(f"❌ NP certification failed: {e}")
        return False
    if abs(radius - target) > 5e-3:
        print(f"❌ NP radius {radius:.4f} differs from {target:.4f}")
        return False
    print(f"✅ NP radius {radius:.4f} (Gaussian closed form {target:.4f})")
    return True


def main():
    print("=" * 70)
    print("smoothcert - Installation Verification")
    print("=" * 70)

    results = {}
    print("\n📋 Interpreter")
    results["interpreter"] = check_interpreter()
    print("\n📦 Packages")
    results["packages"] = check_packages()
    print("\n📁 Package files")
    results["files"] = check_package_files()
    if results["packages"]:
        print("\n🔢 Numerics")
        results["numerics"] = check_numerics()

    print("\n" + "=" * 70)
    failed = [name for name, ok in results.items() if not ok]
    if "numerics" not in results:
        failed.append("numerics (skipped)")
    if failed:
        print(f"❌ Failed: {', '.join(failed)}")
        if "packages" in failed:
            print("\nInstall the requirements with:")
            print("  pip install -r requirements.txt")
        return 1

    print("✅ All checks passed! smoothcert is ready to run.")
    print("\nTry:")
    print("  smoothcert certify np --family esg --eta 2 --d 3072 --A 0.8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
