# pylint: disable=missing-module-docstring,import-error,protected-access,missing-function-docstring
import datetime
import os
import pathlib
import shutil

import nox
from nox.command import CommandFailed

# Reuse existing virtualenvs
nox.options.reuse_existing_virtualenvs = True
# Don't fail on missing interpreters
nox.options.error_on_missing_interpreters = False

PYTHON_VERSIONS = ("3", "3.9", "3.10", "3.11")
CI_RUN = os.environ.get("CI") is not None
PIP_INSTALL_SILENT = CI_RUN is False
SKIP_REQUIREMENTS_INSTALL = "SKIP_REQUIREMENTS_INSTALL" in os.environ

COVERAGE_VERSION_REQUIREMENT = "coverage[toml]>=6.5"

os.environ["PYTHONDONTWRITEBYTECODE"] = "1"

REPO_ROOT = pathlib.Path(__file__).resolve().parent
os.chdir(str(REPO_ROOT))

ARTIFACTS_DIR = REPO_ROOT / "artifacts"
ARTIFACTS_DIR.mkdir(parents=True, exist_ok=True)
CUR_TIME = datetime.datetime.now().strftime("%Y%m%d%H%M%S.%f")
RUNTESTS_LOGFILE = ARTIFACTS_DIR / f"runtests-{CUR_TIME}.log"
COVERAGE_REPORT_DB = REPO_ROOT / ".coverage"
COVERAGE_REPORT_PROJECT = ARTIFACTS_DIR.relative_to(REPO_ROOT) / "coverage-project.xml"
JUNIT_REPORT = ARTIFACTS_DIR.relative_to(REPO_ROOT) / "junit-report.xml"

LINT_TESTS_DISABLED = (
    "I,redefined-outer-name,missing-function-docstring,no-member,missing-module-docstring"
)


def _install(session, *extras, coverage=False):
    if SKIP_REQUIREMENTS_INSTALL:
        return
    session.install("--progress-bar=off", "wheel", silent=PIP_INSTALL_SILENT)
    if coverage:
        session.install(
            "--progress-bar=off", COVERAGE_VERSION_REQUIREMENT, silent=PIP_INSTALL_SILENT
        )
    pkg = "."
    if extras:
        pkg += f"[{','.join(extras)}]"
    session.install("-e", pkg, silent=PIP_INSTALL_SILENT)


@nox.session(python=PYTHON_VERSIONS)
def tests(session):
    _install(session, "tests", coverage=True)

    env = {
        # keep the coverage data file in the repository root
        "COVERAGE_FILE": str(COVERAGE_REPORT_DB),
    }

    session.run("coverage", "erase")
    args = [
        "--rootdir",
        str(REPO_ROOT),
        f"--log-file={RUNTESTS_LOGFILE.relative_to(REPO_ROOT)}",
        "--log-file-level=debug",
        "--show-capture=no",
        f"--junitxml={JUNIT_REPORT}",
        "--showlocals",
        "-ra",
        "-vv",
    ]
    if session._runner.global_config.forcecolor:
        args.append("--color=yes")
    args.extend(session.posargs or ["tests/"])
    try:
        session.run("coverage", "run", "-m", "pytest", *args, env=env)
    finally:
        try:
            session.run("coverage", "combine")
        except CommandFailed:
            # nothing to combine when the run was not parallel
            pass
        session.run(
            "coverage",
            "xml",
            "-o",
            str(COVERAGE_REPORT_PROJECT),
            "--omit=tests/*",
            "--include=src/meelab/*",
        )
        try:
            session.run("coverage", "report", "--show-missing", "--include=src/meelab/*")
        finally:
            if COVERAGE_REPORT_DB.exists():
                shutil.move(str(COVERAGE_REPORT_DB), str(ARTIFACTS_DIR / COVERAGE_REPORT_DB.name))


def _lint(session, flags, paths):
    _install(session, "lint", "tests")
    session.run("pylint", "--version")
    session.run("pylint", *flags, *paths, env={"PYTHONPATH": str(REPO_ROOT / "src")})


@nox.session(python="3")
def lint(session):
    """
    Run PyLint against the code and the test suite.
    """
    session.notify(f"lint-code-{session.python}")
    session.notify(f"lint-tests-{session.python}")


@nox.session(python="3", name="lint-code")
def lint_code(session):
    """
    Run PyLint against the code.
    """
    _lint(session, ["--disable=I"], session.posargs or ["setup.py", "noxfile.py", "src/"])


@nox.session(python="3", name="lint-tests")
def lint_tests(session):
    """
    Run PyLint against the test suite.
    """
    _lint(session, [f"--disable={LINT_TESTS_DISABLED}"], session.posargs or ["tests/"])


@nox.session(python="3")
def docs(session):
    """
    Build the Sphinx HTML documentation, regenerating the API reference first.
    """
    _install(session, "docs")
    gen_api_docs(session)
    build_dir = pathlib.Path("docs", "_build", "html")
    session.run("sphinx-build", "-WnE", "--keep-going", "docs", str(build_dir), external=True)


@nox.session(name="gen-api-docs", python="3")
def gen_api_docs(session):
    """
    Generate API Docs
    """
    _install(session, "docs")
    shutil.rmtree("docs/ref", ignore_errors=True)
    session.run("sphinx-apidoc", "--module-first", "-o", "docs/ref/", "src/meelab")
