//! Local subprocess judge. Each test runs in a fresh child process inside a
//! temporary working directory with resource limits and no inherited
//! environment.

use std::fs;
use std::io::{ErrorKind, Read, Write};
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{outputs_match, DebugInstance, FailingTest, FailureKind, LanguageTag, TestRunResult};
use crate::template::PY_DRIVER;

/// Exit code the Python driver uses for syntax errors.
const COMPILE_EXIT: i32 = 97;
const OUTPUT_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Limits {
    pub wall_ms: u64,
    pub memory_mb: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            wall_ms: 5_000,
            memory_mb: 256,
        }
    }
}

impl Limits {
    pub fn wall(&self) -> Duration {
        Duration::from_millis(self.wall_ms)
    }
}

#[derive(Debug, Error)]
pub enum JudgeError {
    #[error("runtime unavailable: {0}")]
    RuntimeUnavailable(String),
    #[error("sandbox setup failed: {0}")]
    SandboxSetup(#[from] std::io::Error),
}

/// Executes a candidate against an instance's suite.
pub trait Judge: Send + Sync {
    fn run(&self, code: &str, inst: &DebugInstance, limits: &Limits) -> Result<TestRunResult, JudgeError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Runtimes {
    pub python: PathBuf,
    pub cxx: PathBuf,
}

impl Default for Runtimes {
    fn default() -> Self {
        Self {
            python: "python3".into(),
            cxx: "g++".into(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LocalJudge {
    pub runtimes: Runtimes,
}

struct Execution {
    status: Option<ExitStatus>,
    stdout: String,
    stderr: String,
    timed_out: bool,
}

fn sandboxed(program: &Path, dir: &Path, limits: &Limits) -> Command {
    let mut cmd = Command::new(program);
    cmd.current_dir(dir)
        .env_clear()
        .env("PATH", "/usr/local/bin:/usr/bin:/bin")
        .env("HOME", dir)
        .env("PYTHONDONTWRITEBYTECODE", "1")
        .env("PYTHONHASHSEED", "0")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mem = limits.memory_mb.saturating_mul(1 << 20);
    let cpu = limits.wall_ms.div_ceil(1000) + 1;
    // SAFETY: only async-signal-safe libc calls run between fork and exec.
    unsafe {
        cmd.pre_exec(move || {
            libc::setsid();
            let set = |res, v: u64| {
                let lim = libc::rlimit {
                    rlim_cur: v as libc::rlim_t,
                    rlim_max: v as libc::rlim_t,
                };
                libc::setrlimit(res, &lim)
            };
            set(libc::RLIMIT_AS, mem);
            set(libc::RLIMIT_CPU, cpu);
            set(libc::RLIMIT_FSIZE, 16 << 20);
            set(libc::RLIMIT_CORE, 0);
            // Best effort: no network where user namespaces are permitted.
            libc::unshare(libc::CLONE_NEWUSER | libc::CLONE_NEWNET);
            Ok(())
        });
    }
    cmd
}

fn spawn(cmd: &mut Command, what: &Path) -> Result<Child, JudgeError> {
    cmd.spawn().map_err(|e| match e.kind() {
        ErrorKind::NotFound => JudgeError::RuntimeUnavailable(what.display().to_string()),
        _ => JudgeError::SandboxSetup(e),
    })
}

fn drain<R: Read + Send + 'static>(r: Option<R>) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(r) = r {
            let _ = r.take(OUTPUT_CAP).read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

fn execute(mut child: Child, input: &str, wall: Duration) -> Result<Execution, JudgeError> {
    let start = Instant::now();
    let out = drain(child.stdout.take());
    let err = drain(child.stderr.take());
    if let Some(mut stdin) = child.stdin.take() {
        let input = input.to_string();
        thread::spawn(move || {
            let _ = stdin.write_all(input.as_bytes());
        });
    }
    let mut timed_out = false;
    let status = loop {
        if let Some(s) = child.try_wait()? {
            break Some(s);
        }
        if start.elapsed() >= wall {
            timed_out = true;
            // The child leads its own session, so this reaches grandchildren.
            unsafe {
                libc::killpg(child.id() as libc::pid_t, libc::SIGKILL);
            }
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        thread::sleep(Duration::from_millis(2));
    };
    Ok(Execution {
        status,
        stdout: out.join().unwrap_or_default(),
        stderr: err.join().unwrap_or_default(),
        timed_out,
    })
}

fn last_line(text: &str) -> Option<String> {
    text.lines()
        .rev()
        .find(|l| !l.trim().is_empty())
        .map(|l| l.trim().to_string())
}

fn first_line(text: &str) -> Option<String> {
    text.lines()
        .find(|l| !l.trim().is_empty())
        .map(|l| l.trim().to_string())
}

/// Verdict for one finished test, or `None` when it passed.
fn classify(exec: Execution, expected: &str, limits: &Limits) -> Option<(FailureKind, String, Option<String>)> {
    if exec.timed_out {
        return Some((
            FailureKind::Timeout,
            exec.stdout,
            Some(format!("exceeded {} ms", limits.wall_ms)),
        ));
    }
    let code = exec.status.and_then(|s| s.code());
    match code {
        Some(0) if outputs_match(&exec.stdout, expected) => None,
        Some(0) => Some((FailureKind::WrongOutput, exec.stdout, None)),
        Some(COMPILE_EXIT) => Some((FailureKind::CompileError, exec.stdout, first_line(&exec.stderr))),
        _ => {
            let diag = last_line(&exec.stderr).or_else(|| {
                exec.status.map(|s| match s.code() {
                    Some(c) => format!("exit status {c}"),
                    None => "terminated by signal".to_string(),
                })
            });
            Some((FailureKind::RuntimeError, exec.stdout, diag))
        }
    }
}

impl LocalJudge {
    fn compile_cpp(&self, dir: &Path) -> Result<Result<PathBuf, String>, JudgeError> {
        let binary = dir.join("solution");
        let mut cmd = sandboxed(
            &self.runtimes.cxx,
            dir,
            &Limits {
                wall_ms: 60_000,
                memory_mb: 2048,
            },
        );
        cmd.args(["-O2", "-std=c++17", "-o", "solution", "solution.cpp"]);
        let exec = execute(spawn(&mut cmd, &self.runtimes.cxx)?, "", Duration::from_secs(60))?;
        match exec.status {
            Some(s) if s.success() => Ok(Ok(binary)),
            _ => Ok(Err(
                first_line(&exec.stderr).unwrap_or_else(|| "compilation failed".into())
            )),
        }
    }
}

impl Judge for LocalJudge {
    fn run(&self, code: &str, inst: &DebugInstance, limits: &Limits) -> Result<TestRunResult, JudgeError> {
        let dir = tempfile::Builder::new().prefix("judge-").tempdir()?;
        let total = inst.tests.len();
        let mut passed = 0;
        let mut last_failing = None;

        let mut compile_error = None;
        let program: PathBuf;
        let mut args: Vec<String> = Vec::new();
        match inst.language_tag {
            LanguageTag::Python3 | LanguageTag::Python3Stdin => {
                fs::write(dir.path().join("solution.py"), code)?;
                fs::write(dir.path().join("driver.py"), PY_DRIVER)?;
                program = self.runtimes.python.clone();
                args.extend(["-I".into(), "-S".into(), "driver.py".into()]);
                if inst.language_tag == LanguageTag::Python3Stdin {
                    args.push("script".into());
                }
            }
            LanguageTag::CppStdin => {
                fs::write(dir.path().join("solution.cpp"), code)?;
                match self.compile_cpp(dir.path())? {
                    Ok(bin) => program = bin,
                    Err(diag) => {
                        compile_error = Some(diag);
                        program = PathBuf::new();
                    }
                }
            }
        }

        for test in &inst.tests {
            let verdict = match &compile_error {
                Some(diag) => Some((FailureKind::CompileError, String::new(), Some(diag.clone()))),
                None => {
                    let mut cmd = sandboxed(&program, dir.path(), limits);
                    cmd.args(&args);
                    let exec = execute(spawn(&mut cmd, &program)?, &test.input, limits.wall())?;
                    classify(exec, &test.expected_output, limits)
                }
            };
            match verdict {
                None => passed += 1,
                Some((failure_kind, actual_output, diagnostic)) => {
                    last_failing = Some(FailingTest {
                        input: test.input.clone(),
                        expected_output: test.expected_output.clone(),
                        actual_output: actual_output.trim_end().to_string(),
                        failure_kind,
                        diagnostic,
                    });
                }
            }
        }
        Ok(TestRunResult {
            passed,
            total,
            last_failing,
        })
    }
}
