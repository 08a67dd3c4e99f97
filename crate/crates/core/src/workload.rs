// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

//! Master/worker parallel matrix multiplication over the message layer.
//!
//! Core 0 is the master. Rows of `A` are split into contiguous blocks, one
//! per core; the master keeps the first block and the remaining blocks go to
//! workers nearest first (by hop count, ties by id). Each worker with a
//! non-empty block receives its rows of `A` followed by all of `B` and
//! computes its rows of `C`. The master computes its own block after
//! distributing, then collects results worker by worker in the same order:
//! it sends an empty request frame and receives that worker's rows. Pulling
//! keeps result traffic from interrupting the distribution phase.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::{
    decode_reals, encode_reals, CodecError, CodecMode, Message, HEADER_WORDS, REAL_WORDS,
};
use crate::engine::{
    self, Action, CoreProgram, Framing, ProgramError, SimConfig, SimError, Simulation, TraceRecord,
};
use crate::report::Metrics;
use crate::routing::{hop_count, RoutingError};
use crate::topology::{CoreId, Topology};

/// Default bound on generated operand magnitudes.
pub const VALUE_RANGE: f64 = 100.0;

const TAG_A: u8 = 0;
const TAG_B: u8 = 1;
const TAG_C: u8 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("shape mismatch: {a_rows}x{a_cols} times {b_rows}x{b_cols}")]
    ShapeMismatch {
        a_rows: usize,
        a_cols: usize,
        b_rows: usize,
        b_cols: usize,
    },
    #[error("matrix dimension {dim} exceeds the configured cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("{len} values do not fill a {rows}x{cols} matrix")]
    BadLength {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, WorkloadError> {
        if rows == 0 || cols == 0 {
            return Err(WorkloadError::Empty);
        }
        if values.len() != rows * cols {
            return Err(WorkloadError::BadLength {
                rows,
                cols,
                len: values.len(),
            });
        }
        Ok(Matrix { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, WorkloadError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let values: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Matrix::new(rows.len(), cols, values)
    }

    /// Uniform values in `[-range, range]` from a seeded generator.
    pub fn random(rows: usize, cols: usize, range: f64, rng: &mut impl Rng) -> Self {
        let values = (0..rows * cols)
            .map(|_| rng.gen_range(-range..=range))
            .collect();
        Matrix { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Two `size x size` operands drawn from one seeded stream, `A` first.
pub fn seeded_operands(size: usize, seed: u64) -> (Matrix, Matrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Matrix::random(size, size, VALUE_RANGE, &mut rng);
    let b = Matrix::random(size, size, VALUE_RANGE, &mut rng);
    (a, b)
}

fn check_shapes(a: &Matrix, b: &Matrix) -> Result<(), WorkloadError> {
    if a.cols != b.rows {
        return Err(WorkloadError::ShapeMismatch {
            a_rows: a.rows,
            a_cols: a.cols,
            b_rows: b.rows,
            b_cols: b.cols,
        });
    }
    Ok(())
}

// Row `r` of A times B, accumulated in column-index order from 0.0.
fn row_product(a_row: &[f64], b: &Matrix, out: &mut [f64]) {
    for (j, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (l, av) in a_row.iter().enumerate() {
            acc += av * b.get(l, j);
        }
        *slot = acc;
    }
}

/// Sequential triple-loop product.
pub fn matmul_reference(a: &Matrix, b: &Matrix) -> Result<Matrix, WorkloadError> {
    check_shapes(a, b)?;
    let mut c = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let start = i * c.cols;
        row_product(a.row(i), b, &mut c.values[start..start + b.cols]);
    }
    Ok(c)
}

/// Split `m` rows into `workers` contiguous ranges whose sizes differ by at
/// most one, larger ranges first.
pub fn partition_rows(m: usize, workers: usize) -> Vec<Range<usize>> {
    let workers = workers.max(1);
    let base = m / workers;
    let extra = m % workers;
    let mut start = 0;
    (0..workers)
        .map(|w| {
            let len = base + usize::from(w < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Outgoing {
    dst: CoreId,
    tag: u8,
    values: Vec<f64>,
}

fn chunk_frames(framing: Framing, dst: CoreId, tag: u8, rows: &[&[f64]], out: &mut Vec<Outgoing>) {
    for row in rows {
        match framing {
            Framing::PerElement => out.extend(row.iter().map(|&v| Outgoing {
                dst,
                tag,
                values: vec![v],
            })),
            Framing::Bulk => out.push(Outgoing {
                dst,
                tag,
                values: row.to_vec(),
            }),
        }
    }
}

fn protocol(core: CoreId, detail: impl Into<String>) -> ProgramError {
    ProgramError {
        core,
        detail: detail.into(),
    }
}

fn send_action(core: CoreId, mode: CodecMode, o: &Outgoing) -> Result<Action, ProgramError> {
    let payload =
        encode_reals(mode, o.tag, &o.values).map_err(|e| protocol(core, e.to_string()))?;
    Ok(Action::Send(Message::new(core, o.dst, payload)))
}

fn decode(core: CoreId, mode: CodecMode, m: &Message, tag: u8) -> Result<Vec<f64>, ProgramError> {
    let reals = decode_reals(mode, &m.payload).map_err(|e| protocol(core, e.to_string()))?;
    reals
        .into_iter()
        .map(|r| {
            if r.tag == tag {
                Ok(r.value)
            } else {
                Err(protocol(
                    core,
                    format!("expected tag {tag} from {}, got {}", m.src, r.tag),
                ))
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
enum MasterPhase {
    Distribute(usize),
    Compute,
    Gather,
    Done,
}

#[derive(Debug, Clone)]
pub struct Master {
    mode: CodecMode,
    mac_cycles: u64,
    a: Matrix,
    b: Matrix,
    own_rows: Range<usize>,
    outgoing: Vec<Outgoing>,
    // (worker, first row, row count) in gather order
    gather: Vec<(CoreId, usize, usize)>,
    gather_pos: usize,
    gather_filled: usize,
    requested: bool,
    result: Matrix,
    phase: MasterPhase,
}

impl Master {
    pub fn result(&self) -> &Matrix {
        &self.result
    }

    fn next_gather(&mut self, core: CoreId) -> Action {
        match self.gather.get(self.gather_pos) {
            Some(&(w, _, _)) if !self.requested => {
                self.requested = true;
                Action::Send(Message::new(core, w, Vec::new()))
            }
            Some(&(w, _, _)) => Action::Recv(Some(w)),
            None => {
                self.phase = MasterPhase::Done;
                Action::Halt
            }
        }
    }

    fn step(&mut self, core: CoreId, received: Option<Message>) -> Result<Action, ProgramError> {
        loop {
            match self.phase {
                MasterPhase::Distribute(i) => match self.outgoing.get(i) {
                    Some(o) => {
                        let action = send_action(core, self.mode, o)?;
                        self.phase = MasterPhase::Distribute(i + 1);
                        return Ok(action);
                    }
                    None => {
                        self.outgoing = Vec::new();
                        self.phase = MasterPhase::Compute;
                    }
                },
                MasterPhase::Compute => {
                    self.phase = MasterPhase::Gather;
                    let p = self.b.cols;
                    for i in self.own_rows.clone() {
                        let start = i * p;
                        row_product(
                            self.a.row(i),
                            &self.b,
                            &mut self.result.values[start..start + p],
                        );
                    }
                    let cycles = (self.own_rows.len() * p * self.a.cols) as u64 * self.mac_cycles;
                    if cycles > 0 {
                        return Ok(Action::Compute(cycles));
                    }
                }
                MasterPhase::Gather => {
                    if let Some(m) = received {
                        let (w, first, count) = self.gather[self.gather_pos];
                        if m.src != w {
                            return Err(protocol(
                                core,
                                format!("expected result from {w}, got {}", m.src),
                            ));
                        }
                        let p = self.b.cols;
                        let values = decode(core, self.mode, &m, TAG_C)?;
                        let base = first * p;
                        let total = count * p;
                        if self.gather_filled + values.len() > total {
                            return Err(protocol(core, format!("too many result values from {w}")));
                        }
                        let at = base + self.gather_filled;
                        self.result.values[at..at + values.len()].copy_from_slice(&values);
                        self.gather_filled += values.len();
                        if self.gather_filled == total {
                            self.gather_pos += 1;
                            self.gather_filled = 0;
                            self.requested = false;
                        }
                    }
                    return Ok(self.next_gather(core));
                }
                MasterPhase::Done => return Ok(Action::Halt),
            }
        }
    }
}

#[derive(Debug, Clone)]
enum WorkerPhase {
    ReceiveA,
    ReceiveB,
    Compute,
    AwaitRequest,
    Reply(usize),
    Done,
}

#[derive(Debug, Clone)]
pub struct Worker {
    mode: CodecMode,
    framing: Framing,
    mac_cycles: u64,
    rows: usize,
    k: usize,
    p: usize,
    a_block: Vec<f64>,
    b: Vec<f64>,
    replies: Vec<Outgoing>,
    phase: WorkerPhase,
}

impl Worker {
    fn step(&mut self, core: CoreId, received: Option<Message>) -> Result<Action, ProgramError> {
        let master = CoreId(0);
        if let Some(m) = received {
            if m.src != master {
                return Err(protocol(core, format!("unexpected message from {}", m.src)));
            }
            match self.phase {
                WorkerPhase::ReceiveA => {
                    self.a_block.extend(decode(core, self.mode, &m, TAG_A)?);
                    if self.a_block.len() == self.rows * self.k {
                        self.phase = WorkerPhase::ReceiveB;
                    }
                }
                WorkerPhase::ReceiveB => {
                    self.b.extend(decode(core, self.mode, &m, TAG_B)?);
                    if self.b.len() == self.k * self.p {
                        self.phase = WorkerPhase::Compute;
                    }
                }
                WorkerPhase::AwaitRequest if m.payload.is_empty() => {
                    self.phase = WorkerPhase::Reply(0);
                }
                _ => return Err(protocol(core, "message received outside a receive phase")),
            }
        }
        match self.phase {
            WorkerPhase::ReceiveA | WorkerPhase::ReceiveB | WorkerPhase::AwaitRequest => {
                Ok(Action::Recv(Some(master)))
            }
            WorkerPhase::Compute => {
                let b = Matrix {
                    rows: self.k,
                    cols: self.p,
                    values: std::mem::take(&mut self.b),
                };
                let mut c = vec![0.0; self.rows * self.p];
                for (r, out) in c.chunks_exact_mut(self.p).enumerate() {
                    row_product(&self.a_block[r * self.k..(r + 1) * self.k], &b, out);
                }
                let rows: Vec<&[f64]> = c.chunks_exact(self.p).collect();
                chunk_frames(self.framing, master, TAG_C, &rows, &mut self.replies);
                self.phase = WorkerPhase::AwaitRequest;
                Ok(Action::Compute(
                    (self.rows * self.p * self.k) as u64 * self.mac_cycles,
                ))
            }
            WorkerPhase::Reply(i) => match self.replies.get(i) {
                Some(o) => {
                    let action = send_action(core, self.mode, o)?;
                    self.phase = WorkerPhase::Reply(i + 1);
                    Ok(action)
                }
                None => {
                    self.phase = WorkerPhase::Done;
                    Ok(Action::Halt)
                }
            },
            WorkerPhase::Done => Ok(Action::Halt),
        }
    }
}

/// Program of one core in the matrix workload.
#[derive(Debug, Clone)]
pub enum MatmulCore {
    Master(Box<Master>),
    Worker(Box<Worker>),
    Idle,
}

impl CoreProgram for MatmulCore {
    fn step(&mut self, core: CoreId, received: Option<Message>) -> Result<Action, ProgramError> {
        match self {
            MatmulCore::Master(m) => m.step(core, received),
            MatmulCore::Worker(w) => w.step(core, received),
            MatmulCore::Idle => Ok(Action::Halt),
        }
    }
}

/// Message volume implied by a partition plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Volume {
    pub values: u64,
    pub messages: u64,
}

impl Volume {
    /// Payload words on the wire, tag words included.
    pub fn payload_words(&self) -> u64 {
        self.values * REAL_WORDS as u64
    }

    /// Payload plus one header per message.
    pub fn wire_words(&self) -> u64 {
        self.payload_words() + self.messages * HEADER_WORDS as u64
    }
}

/// Per-core programs for one matrix product, plus the plan that produced them.
#[derive(Debug, Clone)]
pub struct WorkloadProgram {
    pub cores: Vec<MatmulCore>,
    /// Row block of each core; index 0 is the master's own share.
    pub partition: Vec<Range<usize>>,
    pub inner_dim: usize,
    pub out_cols: usize,
    pub framing: Framing,
    pub mode: CodecMode,
}

impl WorkloadProgram {
    /// Closed-form values and messages exchanged: every active worker gets
    /// its rows of `A` and all of `B`, one request frame, and returns its
    /// rows of `C`.
    pub fn expected_volume(&self) -> Volume {
        let (k, p) = (self.inner_dim as u64, self.out_cols as u64);
        let mut v = Volume {
            values: 0,
            messages: 0,
        };
        for r in self.partition.iter().skip(1).filter(|r| !r.is_empty()) {
            let rows = r.len() as u64;
            v.values += rows * k + k * p + rows * p;
            v.messages += match self.framing {
                Framing::PerElement => rows * k + k * p + rows * p,
                Framing::Bulk => rows + k + rows,
            } + 1;
        }
        v
    }

    pub fn active_workers(&self) -> usize {
        self.partition
            .iter()
            .skip(1)
            .filter(|r| !r.is_empty())
            .count()
    }

    /// Simulate the program and pull the assembled product off the master.
    pub fn run(self, cfg: &SimConfig, t: &Topology) -> Result<MatmulRun, WorkloadError> {
        let (metrics, cores) = engine::run(cfg, t, self.cores)?;
        let result = match cores.into_iter().next() {
            Some(MatmulCore::Master(m)) => m.result,
            _ => unreachable!("core 0 is always the master"),
        };
        Ok(MatmulRun { metrics, result })
    }

    /// Like [`WorkloadProgram::run`], also returning every processed event.
    pub fn run_traced(
        self,
        cfg: &SimConfig,
        t: &Topology,
    ) -> Result<(MatmulRun, Vec<TraceRecord>), WorkloadError> {
        let mut sim = Simulation::new(cfg, t, self.cores)?.with_trace();
        let metrics = sim.run()?;
        let trace = sim.trace().to_vec();
        let result = match sim.into_programs().into_iter().next() {
            Some(MatmulCore::Master(m)) => m.result,
            _ => unreachable!("core 0 is always the master"),
        };
        Ok((MatmulRun { metrics, result }, trace))
    }
}

#[derive(Debug, Clone)]
pub struct MatmulRun {
    pub metrics: Metrics,
    pub result: Matrix,
}

pub fn build_matmul_program(
    a: &Matrix,
    b: &Matrix,
    t: &Topology,
    cfg: &SimConfig,
) -> Result<WorkloadProgram, WorkloadError> {
    check_shapes(a, b)?;
    let largest = a.rows.max(a.cols).max(b.cols);
    if largest > cfg.max_matrix_dim {
        return Err(WorkloadError::TooLarge {
            dim: largest,
            cap: cfg.max_matrix_dim,
        });
    }
    for v in a.values.iter().chain(&b.values) {
        crate::codec::encode_real(*v)?;
    }
    let n = t.n();
    let blocks = partition_rows(a.rows, n);
    let mut order = (1..n)
        .map(|w| Ok((hop_count(t, CoreId(0), CoreId::from(w))?, w)))
        .collect::<Result<Vec<_>, RoutingError>>()
        .map_err(SimError::from)?;
    order.sort_unstable();
    let mut partition = vec![0..0; n];
    partition[0] = blocks[0].clone();
    for (&(_, w), block) in order.iter().zip(&blocks[1..]) {
        partition[w] = block.clone();
    }
    let (k, p) = (a.cols, b.cols);
    let b_rows: Vec<&[f64]> = (0..k).map(|l| b.row(l)).collect();

    let mut outgoing = Vec::new();
    let mut gather = Vec::new();
    let mut cores: Vec<MatmulCore> = (0..n).map(|_| MatmulCore::Idle).collect();
    for &(_, w) in &order {
        let range = &partition[w];
        if range.is_empty() {
            continue;
        }
        let dst = CoreId::from(w);
        let a_rows: Vec<&[f64]> = range.clone().map(|r| a.row(r)).collect();
        chunk_frames(cfg.framing, dst, TAG_A, &a_rows, &mut outgoing);
        chunk_frames(cfg.framing, dst, TAG_B, &b_rows, &mut outgoing);
        gather.push((dst, range.start, range.len()));
        cores[w] = MatmulCore::Worker(Box::new(Worker {
            mode: cfg.codec_mode,
            framing: cfg.framing,
            mac_cycles: cfg.mac_cycles,
            rows: range.len(),
            k,
            p,
            a_block: Vec::with_capacity(range.len() * k),
            b: Vec::with_capacity(k * p),
            replies: Vec::new(),
            phase: WorkerPhase::ReceiveA,
        }));
    }
    cores[0] = MatmulCore::Master(Box::new(Master {
        mode: cfg.codec_mode,
        mac_cycles: cfg.mac_cycles,
        a: a.clone(),
        b: b.clone(),
        own_rows: partition[0].clone(),
        outgoing,
        gather,
        gather_pos: 0,
        gather_filled: 0,
        requested: false,
        result: Matrix::zeros(a.rows, p),
        phase: MasterPhase::Distribute(0),
    }));
    Ok(WorkloadProgram {
        cores,
        partition,
        inner_dim: k,
        out_cols: p,
        framing: cfg.framing,
        mode: cfg.codec_mode,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub pass: bool,
    pub max_abs_err: f64,
    /// Largest per-element error allowed; zero means exact equality.
    pub bound: f64,
}

/// Per-element error allowed by the decimal codec: each of the `k` products
/// sees two operands off by at most half a micro-unit.
pub fn decimal_error_bound(inner_dim: usize, vmax: f64) -> f64 {
    inner_dim as f64 * 2.0 * vmax * 5e-7
}

pub fn verify_result(
    c_sim: &Matrix,
    c_ref: &Matrix,
    mode: CodecMode,
    inner_dim: usize,
    vmax: f64,
) -> Verification {
    let bound = match mode {
        CodecMode::RawBits => 0.0,
        CodecMode::Decimal => decimal_error_bound(inner_dim, vmax),
    };
    if c_sim.rows != c_ref.rows || c_sim.cols != c_ref.cols {
        return Verification {
            pass: false,
            max_abs_err: f64::INFINITY,
            bound,
        };
    }
    let max_abs_err = c_sim
        .values
        .iter()
        .zip(&c_ref.values)
        .fold(0.0f64, |m, (s, r)| m.max((s - r).abs()));
    let pass = match mode {
        CodecMode::RawBits => c_sim.values == c_ref.values,
        CodecMode::Decimal => max_abs_err <= bound,
    };
    Verification {
        pass,
        max_abs_err,
        bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_hypercube, build_ring, build_star, single_core};

    // Independent schoolbook product, summing in the same order.
    fn brute(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut c = vec![vec![0.0; b[0].len()]; a.len()];
        for i in 0..a.len() {
            for j in 0..b[0].len() {
                for (l, brow) in b.iter().enumerate() {
                    c[i][j] += a[i][l] * brow[j];
                }
            }
        }
        c
    }

    fn sizes(ranges: &[Range<usize>]) -> Vec<usize> {
        ranges.iter().map(|r| r.len()).collect()
    }

    #[test]
    fn reference_examples() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[&[5.0, 6.0], &[7.0, 8.0]]).unwrap();
        let expect = brute(
            &[vec![1.0, 2.0], vec![3.0, 4.0]],
            &[vec![5.0, 6.0], vec![7.0, 8.0]],
        );
        assert_eq!(expect, vec![vec![19.0, 22.0], vec![43.0, 50.0]]);
        assert_eq!(
            matmul_reference(&a, &b).unwrap(),
            Matrix::from_rows(&[&[19.0, 22.0], &[43.0, 50.0]]).unwrap()
        );

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = Matrix::random(3, 3, 10.0, &mut rng);
        assert_eq!(matmul_reference(&Matrix::identity(3), &m).unwrap(), m);
        assert_eq!(
            matmul_reference(&m, &Matrix::zeros(3, 3)).unwrap(),
            Matrix::zeros(3, 3)
        );
    }

    #[test]
    fn reference_agrees_with_brute_force() {
        let (a, b) = seeded_operands(7, 11);
        let rows = |m: &Matrix| (0..m.rows()).map(|r| m.row(r).to_vec()).collect::<Vec<_>>();
        let c = matmul_reference(&a, &b).unwrap();
        assert_eq!(rows(&c), brute(&rows(&a), &rows(&b)));
    }

    #[test]
    fn shape_errors() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(
            matmul_reference(&a, &a),
            Err(WorkloadError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            Matrix::new(2, 2, vec![1.0]),
            Err(WorkloadError::BadLength { .. })
        ));
        assert!(matches!(
            Matrix::new(0, 2, vec![]),
            Err(WorkloadError::Empty)
        ));
    }

    #[test]
    fn partition_examples() {
        assert_eq!(sizes(&partition_rows(8, 7)), vec![2, 1, 1, 1, 1, 1, 1]);
        assert_eq!(sizes(&partition_rows(7, 7)), vec![1; 7]);
        assert_eq!(sizes(&partition_rows(3, 7)), vec![1, 1, 1, 0, 0, 0, 0]);
        assert_eq!(partition_rows(5, 2), vec![0..3, 3..5]);
    }

    #[test]
    fn star_eight_by_eight_plan() {
        let cfg = SimConfig::default();
        let star = build_star(8).unwrap();
        let (a, b) = seeded_operands(8, 1);
        let prog = build_matmul_program(&a, &b, &star, &cfg).unwrap();
        assert_eq!(prog.partition[0], 0..1);
        assert_eq!(prog.active_workers(), 7);
        // per worker: 1 row of A (8) + all of B (64) out, 8 results back
        assert_eq!(prog.expected_volume().values, 7 * (8 + 64 + 8));
        let run = prog.run(&cfg, &star).unwrap();
        assert_eq!(run.metrics.messages_sent, 7 * 81);
        let reference = matmul_reference(&a, &b).unwrap();
        assert!(verify_result(&run.result, &reference, cfg.codec_mode, 8, VALUE_RANGE).pass);
    }

    #[test]
    fn single_core_is_sequential() {
        let cfg = SimConfig::default();
        let t = single_core();
        let (a, b) = seeded_operands(5, 2);
        let prog = build_matmul_program(&a, &b, &t, &cfg).unwrap();
        assert_eq!(
            prog.expected_volume(),
            Volume {
                values: 0,
                messages: 0
            }
        );
        let run = prog.run(&cfg, &t).unwrap();
        assert_eq!(run.result, matmul_reference(&a, &b).unwrap());
        assert_eq!(run.metrics.total_cycles, 5 * 5 * 5 * cfg.mac_cycles);
        assert_eq!(run.metrics.messages_sent, 0);
    }

    #[test]
    fn rawbits_results_are_exact_and_topology_independent() {
        let cfg = SimConfig {
            codec_mode: CodecMode::RawBits,
            ..SimConfig::default()
        };
        let (a, b) = seeded_operands(12, 9);
        let reference = matmul_reference(&a, &b).unwrap();
        for t in [
            build_ring(8).unwrap(),
            build_star(8).unwrap(),
            build_hypercube(3).unwrap(),
        ] {
            let run = build_matmul_program(&a, &b, &t, &cfg)
                .unwrap()
                .run(&cfg, &t)
                .unwrap();
            assert_eq!(run.result, reference, "{}", t.kind());
        }
    }

    #[test]
    fn bulk_framing_matches_volume_formula() {
        let cfg = SimConfig {
            framing: Framing::Bulk,
            ..SimConfig::default()
        };
        let ring = build_ring(8).unwrap();
        let (a, b) = seeded_operands(10, 4);
        let prog = build_matmul_program(&a, &b, &ring, &cfg).unwrap();
        let vol = prog.expected_volume();
        let run = prog.run(&cfg, &ring).unwrap();
        assert_eq!(run.metrics.messages_sent, vol.messages);
        assert_eq!(run.metrics.payload_words_sent, vol.payload_words());
        let reference = matmul_reference(&a, &b).unwrap();
        assert!(verify_result(&run.result, &reference, cfg.codec_mode, 10, VALUE_RANGE).pass);
    }

    #[test]
    fn size_cap_and_range_checks() {
        let cfg = SimConfig {
            max_matrix_dim: 4,
            ..SimConfig::default()
        };
        let t = build_star(4).unwrap();
        let (a, b) = seeded_operands(5, 0);
        assert!(matches!(
            build_matmul_program(&a, &b, &t, &cfg),
            Err(WorkloadError::TooLarge { dim: 5, cap: 4 })
        ));
        let huge = Matrix::new(1, 1, vec![3e9]).unwrap();
        assert!(matches!(
            build_matmul_program(&huge, &huge, &t, &SimConfig::default()),
            Err(WorkloadError::Codec(_))
        ));
    }

    #[test]
    fn verification_examples() {
        let z = Matrix::zeros(3, 3);
        for mode in [CodecMode::Decimal, CodecMode::RawBits] {
            let v = verify_result(&z, &z, mode, 3, 100.0);
            assert!(v.pass);
            assert_eq!(v.max_abs_err, 0.0);
        }
        assert!((decimal_error_bound(8, 100.0) - 8e-4).abs() < 1e-15);
        let mut off = z.clone();
        off.set(1, 1, 1e-9);
        assert!(!verify_result(&off, &z, CodecMode::RawBits, 3, 100.0).pass);
        assert!(verify_result(&off, &z, CodecMode::Decimal, 3, 100.0).pass);
        assert!(!verify_result(&Matrix::zeros(2, 3), &z, CodecMode::Decimal, 3, 1.0).pass);
    }

    #[test]
    fn decimal_mode_within_bound_on_eight_by_eight() {
        let cfg = SimConfig::default();
        let cube = build_hypercube(3).unwrap();
        let (a, b) = seeded_operands(8, 5);
        let run = build_matmul_program(&a, &b, &cube, &cfg)
            .unwrap()
            .run(&cfg, &cube)
            .unwrap();
        let v = verify_result(
            &run.result,
            &matmul_reference(&a, &b).unwrap(),
            cfg.codec_mode,
            8,
            VALUE_RANGE,
        );
        assert!(v.pass, "{v:?}");
        assert!(v.bound <= 8e-4 + 1e-15);
    }
}
