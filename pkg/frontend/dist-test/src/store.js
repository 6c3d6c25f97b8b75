// Minimal observable value container; pages subscribe and re-render.
export class Store {
    constructor(value) {
        this.value = value;
        this.listeners = new Set();
    }
    get() {
        return this.value;
    }
    set(value) {
        this.value = value;
        for (const fn of [...this.listeners])
            fn(value);
    }
    update(fn) {
        this.set(fn(this.value));
    }
    subscribe(fn, fireNow = true) {
        this.listeners.add(fn);
        if (fireNow)
            fn(this.value);
        return () => this.listeners.delete(fn);
    }
}
