use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use super::{Clock, ServiceError, SessionStatus, SessionView, StepView};
use crate::analysis::{TrajectoryLog, TrajectoryRecord};
use crate::maze::{observe, Action};
use crate::protocol::{
    append_meta, apple_line, phase_end_lines, phase_file, write_header, Condition, ExperimentPlan, PhaseLog, PhaseState,
    SessionLog, Subject,
};

const FINISHED_LINE: &str = "status=finished";

/// A session being played. Every change is appended to the session
/// directory before the call returns.
#[derive(Debug)]
pub struct LiveSession {
    dir: PathBuf,
    header: SessionLog,
    done: Vec<PhaseLog>,
    current: PhaseState,
    status: SessionStatus,
    last_t: u64,
}

impl LiveSession {
    fn new(dir: PathBuf, header: SessionLog) -> Result<Self, ServiceError> {
        fs::create_dir_all(&dir)?;
        write_header(&dir, &header)?;
        let current = start_phase(&header.plan, 0, 0)?;
        let mut live = LiveSession { dir, header, done: Vec::new(), current, status: SessionStatus::Active, last_t: 0 };
        live.append_records(&live.current.log().records.clone())?;
        live.settle()?;
        Ok(live)
    }

    /// Rebuilds a session from its directory by replaying every logged
    /// action through the simulator.
    fn restore(dir: PathBuf) -> Result<Self, ServiceError> {
        let log = SessionLog::read_dir(&dir)?;
        let finished = fs::read_to_string(dir.join("meta"))?.lines().any(|l| l == FINISHED_LINE);
        if log.phases.is_empty() {
            return Err(ServiceError::Internal(format!("{}: no phase logs", dir.display())));
        }
        let mut done = Vec::new();
        let mut current = None;
        let mut last_t = 0;
        for (i, recorded) in log.phases.iter().enumerate() {
            let first = recorded.log.records.first().map_or(0, |r| r.t_ms);
            let mut phase = start_phase(&log.plan, i, first)?;
            for r in recorded.log.records.iter().skip(1) {
                let action = r.action.action().ok_or_else(|| corrupt(&dir, "start marker inside a phase"))?;
                phase.apply(action, r.t_ms);
                last_t = r.t_ms;
            }
            last_t = last_t.max(first);
            if phase.log() != &recorded.log {
                return Err(corrupt(&dir, &format!("phase {} does not replay to its log", recorded.label)));
            }
            match (recorded.outcome, phase.outcome()) {
                (a, b) if a == b => {}
                // interrupted between the last record and its outcome line
                (None, Some(outcome)) => append_meta(&dir, &phase_end_lines(&recorded.label, outcome, phase.reward_total()))?,
                _ => return Err(corrupt(&dir, &format!("phase {} outcome disagrees with replay", recorded.label))),
            }
            if i + 1 < log.phases.len() {
                done.push(recorded.clone());
            } else {
                current = Some(phase);
            }
        }
        let current = current.expect("at least one phase");
        let status = match (current.is_over(), finished) {
            (_, true) => SessionStatus::Finished,
            (true, false) => SessionStatus::PhaseComplete,
            (false, false) => SessionStatus::Active,
        };
        let header = SessionLog { phases: Vec::new(), apple_events: log.apple_events, ..log };
        Ok(LiveSession { dir, header, done, current, status, last_t })
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn id(&self) -> &str {
        &self.header.session_id
    }

    fn phase_index(&self) -> usize {
        self.done.len()
    }

    fn stamp(&mut self, now: u64) -> u64 {
        let since_start = now.saturating_sub(self.header.created_unix_ms.unwrap_or(0));
        self.last_t = self.last_t.max(since_start);
        self.last_t
    }

    fn append_records(&self, records: &[TrajectoryRecord]) -> Result<(), ServiceError> {
        let mut f = OpenOptions::new().create(true).append(true).open(self.dir.join(phase_file(&self.current.spec().label)))?;
        let log = TrajectoryLog { records: records.to_vec() };
        log.write_jsonl(&mut f)?;
        f.flush()?;
        Ok(())
    }

    /// Records the outcome once the current phase is over.
    fn settle(&mut self) -> Result<(), ServiceError> {
        if self.status == SessionStatus::Active {
            if let Some(outcome) = self.current.outcome() {
                append_meta(&self.dir, &phase_end_lines(&self.current.spec().label, outcome, self.current.reward_total()))?;
                self.status = SessionStatus::PhaseComplete;
            }
        }
        Ok(())
    }

    pub fn submit(&mut self, action: Action, now: u64) -> Result<StepView, ServiceError> {
        if self.status != SessionStatus::Active {
            return Err(ServiceError::Conflict(format!("session is {}, not active", self.status.as_str())));
        }
        let t = self.stamp(now);
        let report = self.current.apply(action, t).expect("active phase accepts actions");
        let record = *self.current.log().records.last().expect("record just logged");
        self.append_records(&[record])?;
        if let Some(event) = self.current.apple_events().last().filter(|_| report.apple.is_some()) {
            append_meta(&self.dir, &[apple_line(event)])?;
            self.header.apple_events.push(event.clone());
        }
        self.settle()?;
        let apples_consumed = report.apple.map(|c| vec![[c.x, c.y]]).unwrap_or_default();
        Ok(StepView { view: self.view(), entered_cell: report.entered.map(|c| [c.x, c.y]), apples_consumed })
    }

    pub fn advance(&mut self, now: u64) -> Result<SessionView, ServiceError> {
        if self.status != SessionStatus::PhaseComplete {
            return Err(ServiceError::Conflict(format!("session is {}, not phase_complete", self.status.as_str())));
        }
        let next = self.phase_index() + 1;
        if next == self.header.plan.phases.len() {
            append_meta(&self.dir, &[FINISHED_LINE.to_string()])?;
            self.status = SessionStatus::Finished;
            return Ok(self.view());
        }
        let t = self.stamp(now).max(self.last_t + 1);
        self.last_t = t;
        let finished_phase = std::mem::replace(&mut self.current, start_phase(&self.header.plan, next, t)?);
        self.done.push(phase_log(&finished_phase));
        self.status = SessionStatus::Active;
        self.append_records(&self.current.log().records.clone())?;
        self.settle()?;
        Ok(self.view())
    }

    pub fn view(&self) -> SessionView {
        let obs = observe(self.current.maze(), &self.current.pose());
        let maze = self.current.maze();
        let visible = |c: &crate::maze::Cell| [c.x, c.y];
        SessionView {
            session_id: self.header.session_id.clone(),
            status: self.status,
            experiment: self.header.plan.experiment,
            condition: self.header.plan.condition,
            phase: self.current.spec().label.clone(),
            phase_index: self.phase_index(),
            phase_count: self.header.plan.phases.len(),
            goal_active: self.current.spec().goal,
            maze_width: maze.width(),
            maze_height: maze.height(),
            pose: *self.current.log().records.last().expect("phase has a start record"),
            visible_cells: obs.visible_cells.iter().map(visible).collect(),
            open_directions: obs.open_neighbors().map(|(h, _)| h).collect(),
            goal_visible: maze.goal().filter(|g| obs.visible_cells.contains(g)).map(|g| [g.x, g.y]),
            apples_visible: obs
                .apples_visible
                .iter()
                .filter(|c| !self.current.consumed().contains(c))
                .map(visible)
                .collect(),
            on_goal: obs.on_goal,
            transitions: self.current.transitions(),
            budget: self.current.budget(),
        }
    }

    /// Snapshot in the shared session format; an unfinished phase has no
    /// outcome yet.
    pub fn export(&self) -> SessionLog {
        let mut log = self.header.clone();
        log.phases = self.done.clone();
        log.phases.push(phase_log(&self.current));
        log
    }
}

fn corrupt(dir: &Path, what: &str) -> ServiceError {
    ServiceError::Internal(format!("{}: {what}", dir.display()))
}

fn start_phase(plan: &ExperimentPlan, index: usize, t_ms: u64) -> Result<PhaseState, ServiceError> {
    let spec = plan.phases[index].clone();
    Ok(PhaseState::start(spec, plan.phase_maze(index)?, plan.phase_budgets[index], plan.reward, t_ms))
}

fn phase_log(p: &PhaseState) -> PhaseLog {
    PhaseLog {
        label: p.spec().label.clone(),
        maze_id: p.maze().id().to_string(),
        outcome: p.outcome(),
        reward_total: p.reward_total(),
        log: p.log().clone(),
    }
}

/// All live sessions, persisted under one data directory. Each session has
/// its own lock, so different sessions never wait on each other.
pub struct SessionStore {
    data_dir: PathBuf,
    clock: Arc<dyn Clock>,
    sessions: RwLock<HashMap<String, Arc<Mutex<LiveSession>>>>,
}

impl SessionStore {
    /// Opens `data_dir`, restoring every session directory found there.
    /// Directories that fail to restore are skipped and reported.
    pub fn open(data_dir: impl Into<PathBuf>, clock: Arc<dyn Clock>) -> Result<(Self, Vec<ServiceError>), ServiceError> {
        let data_dir = data_dir.into();
        fs::create_dir_all(&data_dir)?;
        let mut sessions = HashMap::new();
        let mut skipped = Vec::new();
        let mut entries: Vec<PathBuf> = fs::read_dir(&data_dir)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
        entries.sort();
        for dir in entries.into_iter().filter(|p| p.join("meta").is_file()) {
            match LiveSession::restore(dir) {
                Ok(s) => {
                    sessions.insert(s.id().to_string(), Arc::new(Mutex::new(s)));
                }
                Err(e) => skipped.push(e),
            }
        }
        Ok((SessionStore { data_dir, clock, sessions: RwLock::new(sessions) }, skipped))
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn create(&self, experiment: u8, condition: Option<&str>, tag: &str) -> Result<SessionView, ServiceError> {
        let condition = match (experiment, condition) {
            (_, Some(c)) => c.parse::<Condition>()?,
            (1, None) => Condition::Standard,
            (2, None) => return Err(ServiceError::BadRequest("experiment 2 needs condition dense or sparse".into())),
            (e, None) => return Err(ServiceError::BadRequest(format!("unknown experiment {e}; expected 1 or 2"))),
        };
        let plan = ExperimentPlan::builtin(experiment, condition)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let header = SessionLog {
            session_id: id.clone(),
            subject: Subject::Human { tag: tag.to_string() },
            plan,
            created_unix_ms: Some(self.clock.now_ms()),
            phases: Vec::new(),
            apple_events: Vec::new(),
        };
        let live = LiveSession::new(self.data_dir.join(&id), header)?;
        let view = live.view();
        self.sessions.write().expect("store lock").insert(id, Arc::new(Mutex::new(live)));
        Ok(view)
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<LiveSession>>, ServiceError> {
        self.sessions
            .read()
            .expect("store lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("no session {id}")))
    }

    pub fn submit(&self, id: &str, action: &str) -> Result<StepView, ServiceError> {
        let session = self.get(id)?;
        let action: Action = action.parse().map_err(|e: crate::maze::UnknownAction| ServiceError::BadRequest(e.to_string()))?;
        let mut s = session.lock().expect("session lock");
        s.submit(action, self.clock.now_ms())
    }

    pub fn advance(&self, id: &str) -> Result<SessionView, ServiceError> {
        let session = self.get(id)?;
        let mut s = session.lock().expect("session lock");
        s.advance(self.clock.now_ms())
    }

    pub fn view(&self, id: &str) -> Result<SessionView, ServiceError> {
        Ok(self.get(id)?.lock().expect("session lock").view())
    }

    pub fn export(&self, id: &str) -> Result<SessionLog, ServiceError> {
        Ok(self.get(id)?.lock().expect("session lock").export())
    }
}
