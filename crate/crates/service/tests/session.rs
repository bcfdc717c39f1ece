mod common;

use std::sync::Arc;
use std::time::Duration;

use amrrt_core::metrics::{MetricParams, MetricRegistry};
use amrrt_core::planner::PlannerConfig;
use amrrt_core::{fixtures, Rect, State};
use amrrt_service::protocol::RemoveObstacle;
use amrrt_service::{Command, Inbox, ServiceError, Session, SessionOptions, SessionSpec};
use common::audit_tree;

fn goal(seq: u64, x: f64) -> Command {
    Command::SetGoal { seq, goal: State::new(x, 50.0) }
}

#[test]
fn newest_set_goal_wins() {
    let inbox = Inbox::new(8);
    inbox.push(goal(1, 10.0)).unwrap();
    inbox.push(Command::Pause { seq: 2 }).unwrap();
    inbox.push(goal(3, 20.0)).unwrap();
    inbox.push(goal(4, 30.0)).unwrap();
    assert_eq!(inbox.drain(), vec![Command::Pause { seq: 2 }, goal(4, 30.0)]);
    assert!(inbox.is_empty());
}

#[test]
fn inbox_is_bounded_and_closable() {
    let inbox = Inbox::new(2);
    inbox.push(Command::Pause { seq: 1 }).unwrap();
    inbox.push(Command::Resume { seq: 2 }).unwrap();
    assert!(matches!(inbox.push(Command::Pause { seq: 3 }), Err(ServiceError::InboxFull)));
    // A replacing goal still needs room.
    assert!(matches!(inbox.push(goal(4, 1.0)), Err(ServiceError::InboxFull)));
    inbox.drain();
    inbox.close();
    assert!(matches!(inbox.push(Command::Pause { seq: 5 }), Err(ServiceError::Closed)));
}

#[test]
fn wait_returns_on_push() {
    let inbox = Arc::new(Inbox::new(4));
    let pusher = {
        let inbox = inbox.clone();
        std::thread::spawn(move || {
            std::thread::sleep(Duration::from_millis(20));
            inbox.push(Command::Resume { seq: 1 }).unwrap();
        })
    };
    let t = std::time::Instant::now();
    inbox.wait_until(t + Duration::from_secs(10));
    assert!(t.elapsed() < Duration::from_secs(5));
    assert_eq!(inbox.len(), 1);
    pusher.join().unwrap();
}

fn spec(map: &str, start: State, config: PlannerConfig) -> SessionSpec {
    let env = fixtures::load(map).unwrap();
    let metric = MetricRegistry::standard().build("euclidean", &env, &MetricParams::default()).unwrap();
    SessionSpec { env, variant: "am-rrt-e".into(), start, config, metric }
}

fn fast() -> SessionOptions {
    SessionOptions { snapshot_interval: Duration::from_millis(20), realtime: false, inbox_cap: 16 }
}

fn until<F: Fn(&amrrt_service::protocol::Frame) -> bool>(s: &Session, ok: F) -> Arc<amrrt_service::protocol::Frame> {
    let frames = s.frames();
    let t = std::time::Instant::now();
    loop {
        let f = frames.borrow().clone();
        if ok(&f) {
            return f;
        }
        assert!(t.elapsed() < Duration::from_secs(30), "condition not reached");
        std::thread::sleep(Duration::from_millis(5));
    }
}

#[test]
fn invalid_config_is_refused() {
    let cfg = PlannerConfig { s_max: 0.0, ..PlannerConfig::default() };
    assert!(matches!(Session::start(1, spec("empty", State::new(10.0, 10.0), cfg), fast()), Err(ServiceError::Config(_))));
    let cfg = PlannerConfig { s_max: -2.0, ..PlannerConfig::default() };
    assert!(Session::start(1, spec("empty", State::new(10.0, 10.0), cfg), fast()).is_err());
}

#[test]
fn blocked_start_is_refused() {
    let env = fixtures::load("maze").unwrap();
    let wall = (0..env.rows())
        .flat_map(|r| (0..env.cols()).map(move |c| (c, r)))
        .find(|&(c, r)| env.is_cell_blocked(c, r))
        .map(|(c, r)| env.cell_center(c, r))
        .unwrap();
    assert!(Session::start(1, spec("maze", wall, PlannerConfig::default()), fast()).is_err());
}

#[test]
fn starts_paused_with_one_node() {
    let s = Session::start(1, spec("empty", State::new(10.0, 10.0), PlannerConfig::default()), fast()).unwrap();
    std::thread::sleep(Duration::from_millis(100));
    let f = s.frames().borrow().clone();
    assert!(f.paused);
    assert_eq!(f.planner.stats.size, 1);
    assert_eq!(f.planner.stats.iter, 0);
    s.close();
}

#[test]
fn commands_apply_while_paused_and_steps_resume() {
    let mut s = Session::start(7, spec("empty", State::new(10.0, 10.0), PlannerConfig::default()), fast()).unwrap();
    s.send(goal(1, 80.0)).unwrap();
    let f = until(&s, |f| f.planner.goal.is_some());
    assert_eq!(f.planner.goal, Some(State::new(80.0, 50.0)));
    assert_eq!(f.planner.stats.iter, 0, "no step while paused");

    s.send(Command::Resume { seq: 2 }).unwrap();
    let f = until(&s, |f| f.planner.stats.goal_found && !f.paused);
    audit_tree(&f.to_snapshot(usize::MAX).tree, true).unwrap();

    let rect = Rect { min: State::new(40.0, 40.0), max: State::new(45.0, 45.0) };
    s.send(Command::AddObstacle { seq: 3, rect }).unwrap();
    let f = until(&s, |f| !f.obstacles.is_empty());
    let id = f.obstacles[0].id;
    s.send(Command::RemoveObstacle { seq: 4, which: RemoveObstacle::Id { id } }).unwrap();
    until(&s, |f| f.obstacles.is_empty());

    // Failures come back tagged with the command's sequence number.
    s.send(Command::RemoveObstacle { seq: 5, which: RemoveObstacle::Id { id } }).unwrap();
    let rt = tokio::runtime::Builder::new_current_thread().enable_time().build().unwrap();
    let err = rt.block_on(async { tokio::time::timeout(Duration::from_secs(10), s.next_error()).await }).unwrap().unwrap();
    assert_eq!(err.reply_to, Some(5));
    s.send(Command::RemoveObstacle { seq: 6, which: RemoveObstacle::Area(rect) }).unwrap();
    let err = rt.block_on(async { tokio::time::timeout(Duration::from_secs(10), s.next_error()).await }).unwrap().unwrap();
    assert_eq!(err.reply_to, Some(6));
    s.close();
}

#[test]
fn goal_inside_an_obstacle_reports_an_error() {
    let mut s = Session::start(2, spec("empty", State::new(10.0, 10.0), PlannerConfig::default()), fast()).unwrap();
    let rect = Rect { min: State::new(60.0, 60.0), max: State::new(70.0, 70.0) };
    s.send(Command::AddObstacle { seq: 1, rect }).unwrap();
    s.send(Command::SetGoal { seq: 2, goal: State::new(65.0, 65.0) }).unwrap();
    let rt = tokio::runtime::Builder::new_current_thread().enable_time().build().unwrap();
    let err = rt.block_on(async { tokio::time::timeout(Duration::from_secs(10), s.next_error()).await }).unwrap().unwrap();
    assert_eq!(err.reply_to, Some(2));
    assert!(err.message.contains("obstacle"), "{}", err.message);
    assert_eq!(s.frames().borrow().planner.goal, None);
    s.close();
}
