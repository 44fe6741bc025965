use std::collections::HashMap;
use std::sync::Mutex;

use chrono::{DateTime, Duration, Utc};
use rand::RngCore;

/// Opaque bearer tokens bound to one matter each, with idle expiry.
pub struct SessionManager {
    idle: Duration,
    sessions: Mutex<HashMap<String, Session>>,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub matter_id: String,
    pub created_at: DateTime<Utc>,
    pub last_active: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionCheck {
    Valid,
    Unknown,
    WrongMatter,
    Expired,
}

impl SessionManager {
    pub fn new(idle: Duration) -> Self {
        Self {
            idle,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    /// Issues a fresh 128-bit token for `matter_id`.
    pub fn issue(&self, matter_id: &str, now: DateTime<Utc>) -> String {
        let mut bytes = [0u8; 16];
        rand::rngs::OsRng.fill_bytes(&mut bytes);
        let token = hex::encode(bytes);
        self.sessions.lock().unwrap().insert(
            token.clone(),
            Session {
                matter_id: matter_id.to_string(),
                created_at: now,
                last_active: now,
            },
        );
        token
    }

    /// Validates the token for the matter and, if valid, refreshes its idle
    /// timer. Expired sessions stay expired.
    pub fn touch(&self, token: &str, matter_id: &str, now: DateTime<Utc>) -> SessionCheck {
        let mut sessions = self.sessions.lock().unwrap();
        let Some(s) = sessions.get_mut(token) else {
            return SessionCheck::Unknown;
        };
        if s.matter_id != matter_id {
            return SessionCheck::WrongMatter;
        }
        if now - s.last_active > self.idle {
            return SessionCheck::Expired;
        }
        s.last_active = now;
        SessionCheck::Valid
    }
}
