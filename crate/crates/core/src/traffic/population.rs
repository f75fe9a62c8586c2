use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mix::UserId;
use crate::seed;

/// Users, their per-second sending probabilities and persistent contacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Population {
    rates: Vec<f64>,
    contacts: Vec<UserId>,
}

impl Population {
    /// `users` users all sending with probability `rate` per second. Contacts
    /// start as the next user id; call [`assign_contacts`] to randomize.
    pub fn uniform(users: usize, rate: f64) -> Result<Self> {
        if users < 3 {
            return Err(Error::TooFewUsers(users));
        }
        let p = Population {
            rates: vec![rate; users],
            contacts: (0..users).map(|u| UserId(((u + 1) % users) as u32)).collect(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rates.len();
        if n < 3 {
            return Err(Error::TooFewUsers(n));
        }
        if let Some(r) = self.rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::config(format!("per-user rate {r} outside [0, 1]")));
        }
        let total = self.global_rate();
        if total > 1.0 + 1e-9 {
            return Err(Error::config(format!("global sending rate {total} exceeds 1")));
        }
        for (u, c) in self.contacts.iter().enumerate() {
            if c.index() == u || c.index() >= n {
                return Err(Error::config(format!("user {u} has invalid contact {c}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> {
        (0..self.rates.len() as u32).map(UserId)
    }

    pub fn rate(&self, u: UserId) -> f64 {
        self.rates[u.index()]
    }

    pub fn set_rate(&mut self, u: UserId, rate: f64) {
        self.rates[u.index()] = rate;
    }

    /// `R = sum r_i`, the expected messages per second.
    pub fn global_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn contact(&self, u: UserId) -> UserId {
        self.contacts[u.index()]
    }

    pub fn set_contact(&mut self, u: UserId, c: UserId) {
        assert_ne!(u, c, "a user cannot be its own contact");
        self.contacts[u.index()] = c;
    }

    pub fn contacts(&self) -> &[UserId] {
        &self.contacts
    }

    /// Draws a user uniformly from everyone except `exclude`.
    pub fn draw_other<R: Rng>(&self, rng: &mut R, exclude: &[UserId]) -> UserId {
        debug_assert!(exclude.len() < self.len());
        loop {
            let u = UserId(rng.random_range(0..self.len() as u32));
            if !exclude.contains(&u) {
                return u;
            }
        }
    }
}

/// Gives every user a contact drawn uniformly from the other users.
/// Reciprocity is not enforced.
pub fn assign_contacts(mut population: Population, seed: u64) -> Result<Population> {
    if population.len() < 3 {
        return Err(Error::TooFewUsers(population.len()));
    }
    let mut rng = seed::rng(seed);
    let n = population.len() as u32;
    for u in 0..n {
        // uniform over the n-1 others: draw from n-1 and skip self
        let mut c = rng.random_range(0..n - 1);
        if c >= u {
            c += 1;
        }
        population.contacts[u as usize] = UserId(c);
    }
    Ok(population)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_users() {
        assert!(matches!(Population::uniform(2, 0.1), Err(Error::TooFewUsers(2))));
        let p = Population {
            rates: vec![0.1; 2],
            contacts: vec![UserId(1), UserId(0)],
        };
        assert!(matches!(assign_contacts(p, 0), Err(Error::TooFewUsers(2))));
    }

    #[test]
    fn global_rate_bound() {
        assert!(Population::uniform(100, 0.01).is_ok());
        assert!(Population::uniform(100, 0.02).is_err());
        assert!((Population::uniform(100, 0.01).unwrap().global_rate() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_users_pick_the_other_two() {
        let mut seen = [[0usize; 3]; 3];
        for s in 0..2000 {
            let p = assign_contacts(Population::uniform(3, 0.1).unwrap(), s).unwrap();
            p.validate().unwrap();
            for u in p.users() {
                seen[u.index()][p.contact(u).index()] += 1;
            }
        }
        for (u, row) in seen.iter().enumerate() {
            assert_eq!(row[u], 0);
            for (c, &k) in row.iter().enumerate() {
                if c != u {
                    // 1000 expected, sigma ~ 22
                    assert!((900..1100).contains(&k), "{u}->{c}: {k}");
                }
            }
        }
    }
}
