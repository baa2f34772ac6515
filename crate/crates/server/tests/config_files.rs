mod common;

use common::{repo_path, shipped_config};
use quadruped_core::kinematics::LegGeometry;
use quadruped_server::{load_config, Config, ConfigError, Scenario};

#[test]
fn shipped_config_matches_builtin_defaults() {
    let c = shipped_config();
    assert_eq!(c.geometry().l_upper, 0.150);
    assert_eq!(*c.geometry(), LegGeometry::default());
    assert_eq!(c, Config::default());
}

#[test]
fn missing_servo_block_uses_defaults() {
    let text = std::fs::read_to_string(repo_path("config/default.toml")).unwrap();
    let start = text.find("[servo]").unwrap();
    let end = text.find("[sim]").unwrap();
    let without = format!("{}{}", &text[..start], &text[end..]);
    assert!(!without.contains("max_torque"));
    let c = Config::from_toml_str(&without).unwrap();
    assert_eq!(c.servo.max_torque, 7.0);
    assert_eq!(c.servo.max_speed, 7.0);
}

#[test]
fn zero_cycle_period_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    for text in ["[gait]\ncycle_period = 0\n", "[gait]\ncycle_period = 0.0\n"] {
        std::fs::write(&path, text).unwrap();
        match load_config(&path) {
            Err(ConfigError::Validation { field }) => assert_eq!(field, "gait.cycle_period"),
            other => panic!("{other:?}"),
        }
    }
    std::fs::write(&path, "[gait]\n\ncycle_period = \"fast\"\n").unwrap();
    assert!(matches!(load_config(&path), Err(ConfigError::Parse { line: 3, .. })));
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(load_config(repo_path("config/nope.toml")), Err(ConfigError::Io { .. })));
}

#[test]
fn shipped_scenarios_parse() {
    let c = shipped_config();
    for name in ["trot", "walk"] {
        let s = Scenario::load(repo_path(&format!("scenarios/{name}.toml")), &c.default_command).unwrap();
        assert!(!s.keyframes().is_empty());
    }
    let walk = common::shipped_scenario("walk", &c);
    assert_eq!(walk.duration(), 10.0);
}
